//! Checkable analytic laws for norms, correlations and compressions.
//!
//! Every checker takes a fully concrete instance and certifies one
//! inequality, restated so that both sides are polynomial in the data: k-th
//! roots never appear, which lets the rational backend certify with zero
//! tolerance. A [`LawReport`] records both sides, the margin and a verdict.
//!
//! Checkers do not manufacture their own instances; the generators further
//! down (and the verification suites) do that, since how hard an instance
//! exercises a law is a separate concern from whether the law holds on it.

use crate::group::GroupSpec;
use crate::harmonic::{RealF, RealFn};
use crate::scalar::{le_margin, margin_ok, Scalar};
use crate::seeding::{random_nonempty_subset, RngExt};
use crate::{ApcError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const LAW_IDS: &[&str] = &[
    "decoupling",
    "fourier_knorm",
    "positive_correlation",
    "odd_central_moments",
    "odd_moments_bound",
    "local_decoupling",
    "local_upper_to_lower",
    "compressions_escape",
    "bs_infnorm",
    "khintchine",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawReport {
    pub law: String,
    pub holds: bool,
    /// Certified comparisons, worst (smallest margin) first.
    pub checks: Vec<CheckLine>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckLine {
    pub what: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; nonnegative (−1e−9 slack in float mode) when the claim
    /// holds.
    pub margin: f64,
    pub ok: bool,
}

fn check_le<S: Scalar>(what: impl Into<String>, lhs: &S, rhs: &S) -> CheckLine {
    let margin = le_margin(lhs, rhs);
    CheckLine {
        what: what.into(),
        lhs: lhs.to_f64(),
        rhs: rhs.to_f64(),
        margin: margin.to_f64(),
        ok: margin_ok::<S>(&margin),
    }
}

fn finish(law: &str, mut checks: Vec<CheckLine>) -> LawReport {
    checks.sort_by(|a, b| a.margin.total_cmp(&b.margin));
    LawReport { law: law.into(), holds: checks.iter().all(|c| c.ok), checks }
}

/// `∥f∗g∥_k ≤ ∥f⋆f∥_k^{1/2} ∥g⋆g∥_k^{1/2}` for even k, certified as
/// `X² ≤ Y·Z` on the k-th powers.
pub fn decoupling<S: Scalar>(f: &RealFn<S>, g: &RealFn<S>, k: u32) -> Result<LawReport> {
    require_even(k)?;
    let x = f.convolve(g).knorm_pow(k);
    let y = f.crosscorr(f).knorm_pow(k);
    let z = g.crosscorr(g).knorm_pow(k);
    let line = check_le(
        format!("E(f∗g)^{k} squared vs E(f⋆f)^{k}·E(g⋆g)^{k}"),
        &(x.clone() * x),
        &(y * z),
    );
    Ok(finish("decoupling", vec![line]))
}

/// `E f^k` agrees with the frequency-side sum over k-tuples of frequencies
/// adding to zero (float only; agreement to 1e−9).
pub fn fourier_knorm(f: &RealF, k: u32) -> Result<LawReport> {
    require_even(k)?;
    let direct = f.knorm_pow(k);
    let spec = crate::harmonic::fourier::dft_fast(f);
    let via = crate::harmonic::fourier::moment_via_spectrum(&spec, k);
    let diff = (direct - via.re).abs().max(via.im.abs());
    let line = CheckLine {
        what: format!("|direct E f^{k} − spectral-side sum|"),
        lhs: diff,
        rhs: 1e-9,
        margin: 1e-9 - diff,
        ok: diff <= 1e-9,
    };
    Ok(finish("fourier_knorm", vec![line]))
}

/// `E[f₁f₂⋯f_m] ≥ Π E[f_i]` for spectrally positive `f_i`. The checker
/// certifies the inequality; positivity of the inputs is the caller's
/// responsibility (generators build them as autocorrelations).
pub fn positive_correlation<S: Scalar>(fs: &[RealFn<S>]) -> Result<LawReport> {
    if fs.is_empty() {
        return Err(ApcError::Precondition("need at least one function".into()));
    }
    let mut product = fs[0].clone();
    let mut mean_product = fs[0].expectation();
    for f in &fs[1..] {
        product = product.mul(f);
        mean_product = mean_product * f.expectation();
    }
    let line = check_le(
        format!("Π E[f_i] vs E[Π f_i] over {} factors", fs.len()),
        &mean_product,
        &product.expectation(),
    );
    Ok(finish("positive_correlation", vec![line]))
}

/// Odd central moments `E(D−1)^k ≥ 0` of a spectrally positive density.
pub fn odd_central_moments<S: Scalar>(d: &RealFn<S>, max_k: u32) -> Result<LawReport> {
    require_density(d)?;
    let centered = d.sub_const(&S::one());
    let mut checks = Vec::new();
    let mut k = 1;
    while k <= max_k {
        let moment = centered.map(|v| v.powu(k)).expectation();
        checks.push(check_le(format!("0 vs E(D−1)^{k}"), &S::zero(), &moment));
        k += 2;
    }
    Ok(finish("odd_central_moments", checks))
}

/// From nonnegative odd central moments and a deviation `∥X−1∥_{k0} ≥ ε`
/// (even k0, ε ≤ ½) to `4·E|X|^{k′} ≥ (1+ε)^{k′}` for every integer
/// `k′ ≥ 2k0/ε` — i.e. `∥X∥_{k′} ≥ 4^{−1/k′}(1+ε) ≥ 1+ε/2`.
pub fn odd_moments_bound<S: Scalar>(
    x: &RealFn<S>,
    k0: u32,
    eps: &S,
    kprimes: &[u32],
) -> Result<LawReport> {
    require_even(k0)?;
    if !(eps.is_nonnegative() && *eps <= S::from_ratio(1, 2)) {
        return Err(ApcError::Precondition("need ε ∈ [0, 1/2]".into()));
    }
    let two_k0 = S::from_int(2 * k0 as i64);
    for &kp in kprimes {
        // k′ ≥ 2k0/ε ⟺ k′·ε ≥ 2k0.
        if S::from_int(kp as i64) * eps.clone() < two_k0 {
            return Err(ApcError::Precondition(format!(
                "k′ = {kp} is below the threshold 2k0/ε"
            )));
        }
    }
    let centered = x.sub_const(&S::one());
    let mut checks = Vec::new();
    // Hypothesis: odd central moments up to the largest k′ probed.
    let top = kprimes.iter().copied().max().unwrap_or(k0) | 1;
    let mut k = 1;
    while k <= top {
        let m = centered.map(|v| v.powu(k)).expectation();
        checks.push(check_le(format!("hypothesis: 0 vs E(X−1)^{k}"), &S::zero(), &m));
        k += 2;
    }
    // Hypothesis: deviation at k0.
    checks.push(check_le(
        format!("hypothesis: ε^{k0} vs E|X−1|^{k0}"),
        &eps.clone().powu(k0),
        &centered.knorm_pow(k0),
    ));
    // Conclusion at each admissible k′.
    let one_plus = S::one() + eps.clone();
    for &kp in kprimes {
        checks.push(check_le(
            format!("conclusion: (1+ε)^{kp} vs 4·E|X|^{kp}"),
            &one_plus.clone().powu(kp),
            &(S::from_int(4) * x.knorm_pow(kp)),
        ));
    }
    Ok(finish("odd_moments_bound", checks))
}

/// Weighted decoupling against a spectrally positive density D and any
/// translate `T_θD`:
/// `∥f∗g∥²_{k,T_θD} ≤ ∥f⋆f∥_{k,D}·∥g⋆g∥_{k,D}` (even k), certified on k-th
/// powers as `P² ≤ Q·R`.
pub fn local_decoupling<S: Scalar>(
    f: &RealFn<S>,
    g: &RealFn<S>,
    weight: &RealFn<S>,
    theta: usize,
    k: u32,
) -> Result<LawReport> {
    require_even(k)?;
    require_density(weight)?;
    let shifted = weight.translate(theta);
    let p = f.convolve(g).weighted_knorm_pow(k, &shifted);
    let q = f.crosscorr(f).weighted_knorm_pow(k, weight);
    let r = g.crosscorr(g).weighted_knorm_pow(k, weight);
    let line = check_le(
        format!("⟨T_θD,(f∗g)^{k}⟩ squared vs ⟨D,(f⋆f)^{k}⟩·⟨D,(g⋆g)^{k}⟩, θ={theta}"),
        &(p.clone() * p),
        &(q * r),
    );
    Ok(finish("local_decoupling", vec![line]))
}

/// Corollary of the weighted decoupling for a density A:
/// `∥A∗A−1∥_{k,T_θD} ≤ ∥A⋆A−1∥_{k,D}` on k-th powers.
pub fn local_translate_transfer<S: Scalar>(
    a: &RealFn<S>,
    weight: &RealFn<S>,
    theta: usize,
    k: u32,
) -> Result<LawReport> {
    require_even(k)?;
    require_density(a)?;
    require_density(weight)?;
    let centered = a.sub_const(&S::one());
    let lhs = centered
        .convolve(&centered)
        .weighted_knorm_pow(k, &weight.translate(theta));
    let rhs = centered.crosscorr(&centered).weighted_knorm_pow(k, weight);
    let line = check_le(
        format!("⟨T_θD,(A∗A−1)^{k}⟩ vs ⟨D,(A⋆A−1)^{k}⟩, θ={theta}"),
        &lhs,
        &rhs,
    );
    Ok(finish("local_decoupling", vec![line]))
}

/// Local upper-to-lower: if `∥A⋆A−1∥_{k,D} ≥ ε` (even k, ε ≤ ½, D a
/// spectrally positive density) then `4·⟨D,(A⋆A)^{k′}⟩ ≥ (1+ε)^{k′}` for
/// any integer `k′ ≥ 2k/ε`.
pub fn local_upper_to_lower<S: Scalar>(
    a: &RealFn<S>,
    weight: &RealFn<S>,
    k: u32,
    eps: &S,
    kprime: u32,
) -> Result<LawReport> {
    require_even(k)?;
    require_density(a)?;
    require_density(weight)?;
    if !(eps.is_nonnegative() && *eps <= S::from_ratio(1, 2)) {
        return Err(ApcError::Precondition("need ε ∈ [0, 1/2]".into()));
    }
    if S::from_int(kprime as i64) * eps.clone() < S::from_int(2 * k as i64) {
        return Err(ApcError::Precondition("k′ must be at least 2k/ε".into()));
    }
    let auto = a.crosscorr(a);
    let centered = auto.sub_const(&S::one());
    let mut checks = Vec::new();
    checks.push(check_le(
        format!("hypothesis: ε^{k} vs ⟨D,(A⋆A−1)^{k}⟩"),
        &eps.clone().powu(k),
        &centered.weighted_knorm_pow(k, weight),
    ));
    checks.push(check_le(
        format!("conclusion: (1+ε)^{kprime} vs 4·⟨D,(A⋆A)^{kprime}⟩"),
        &(S::one() + eps.clone()).powu(kprime),
        &(S::from_int(4) * auto.weighted_knorm_pow(kprime, weight)),
    ));
    Ok(finish("local_upper_to_lower", checks))
}

/// Compressions escape sub-level sets. With `D^{∧k} := D^k/E D^k`:
/// * on `S = {D ≤ (1−ε)∥D∥_k}`: `⟨D^{∧k},1_S⟩ ≤ (1−ε)^k·E[1_S]`;
/// * on `S′ = {D ≤ c∥D∥_k^{1+1/(k−1)}}`: `⟨D^{∧k},1_{S′}⟩ ≤ c^{k−1}` (k≥2);
/// * `∥D^{∧k}∥_∞ ≤ ∥D∥_∞^k`.
///
/// Both level sets are carved out by root-free membership tests so the
/// rational backend stays exact.
pub fn compressions_escape<S: Scalar>(
    d: &RealFn<S>,
    k: u32,
    eps: &S,
    c: &S,
) -> Result<LawReport> {
    require_density(d)?;
    if k < 2 {
        return Err(ApcError::Precondition("need k ≥ 2".into()));
    }
    if !(eps.is_nonnegative() && *eps <= S::one() && c.is_nonnegative()) {
        return Err(ApcError::Precondition("need ε ∈ [0,1] and c ≥ 0".into()));
    }
    let n = S::from_int(d.group().order() as i64);
    let dk_mean = d.knorm_pow(k); // E D^k = ∥D∥_k^k
    let mut checks = Vec::new();

    // S: membership test D(x)^k ≤ (1−ε)^k · E D^k.
    let level = (S::one() - eps.clone()).powu(k) * dk_mean.clone();
    let mut mass_on_s = S::zero(); // Σ_{x∈S} D(x)^k
    let mut size_s = 0usize;
    for v in d.values() {
        let vk = v.clone().powu(k);
        if vk <= level {
            mass_on_s = mass_on_s + vk;
            size_s += 1;
        }
    }
    // ⟨D^{∧k},1_S⟩ = (Σ_S D^k)/(|G|·E D^k)  vs  (1−ε)^k·|S|/|G|.
    checks.push(check_le(
        format!("⟨D^∧{k},1_S⟩ vs (1−ε)^{k}·E[1_S]  (|S|={size_s})"),
        &(mass_on_s / (n.clone() * dk_mean.clone())),
        &((S::one() - eps.clone()).powu(k) * S::from_int(size_s as i64) / n.clone()),
    ));

    // S′: membership test D(x)^{k−1} ≤ c^{k−1} · E D^k.
    let level2 = c.clone().powu(k - 1) * dk_mean.clone();
    let mut mass_on_s2 = S::zero();
    let mut size_s2 = 0usize;
    for v in d.values() {
        if v.clone().powu(k - 1) <= level2 {
            mass_on_s2 = mass_on_s2 + v.clone().powu(k);
            size_s2 += 1;
        }
    }
    checks.push(check_le(
        format!("⟨D^∧{k},1_S′⟩ vs c^{}  (|S′|={size_s2})", k - 1),
        &(mass_on_s2 / (n * dk_mean.clone())),
        &c.clone().powu(k - 1),
    ));

    // Entropy-deficit bound on the compression.
    let dmax = d.infnorm();
    checks.push(check_le(
        format!("∥D^∧{k}∥_∞ vs ∥D∥_∞^{k}"),
        &(dmax.clone().powu(k) / dk_mean),
        &dmax.powu(k),
    ));
    Ok(finish("compressions_escape", checks))
}

/// `∥D∗D′−1∥_∞ ≤ ε` where `ε = max(∥D∥_∞, ∥D′∥_∞) − 1`, for any two
/// densities. Holds with no further hypotheses.
pub fn bs_infnorm<S: Scalar>(d: &RealFn<S>, dprime: &RealFn<S>) -> Result<LawReport> {
    require_density(d)?;
    require_density(dprime)?;
    let m = d.infnorm();
    let mp = dprime.infnorm();
    let eps = if m > mp { m } else { mp } - S::one();
    let dev = d.convolve(dprime).sub_const(&S::one()).infnorm();
    let line = check_le("∥D∗D′−1∥_∞ vs max(∥D∥_∞,∥D′∥_∞)−1", &dev, &eps);
    Ok(finish("bs_infnorm", vec![line]))
}

/// Vector-valued average-deviation bound, checked exactly on a finite model:
/// `ℓ` i.i.d. draws `v_i` uniform over the rows of `pool` (nonnegative
/// integer vectors), `v := (1/ℓ)Σ(v_i−μ)`, claim
/// `E∥v∥_k^k ≤ (k/ℓ)^{k/2}·M` with `M = E∥v_1∥_k^k`, for even k.
///
/// Coordinates contribute to `E∥v∥_k^k` independently, so the expectation is
/// computed per coordinate by dynamic programming over the exact
/// distribution of the centered partial sums — no sampling involved.
pub fn khintchine_exact(pool: &[Vec<u32>], ell: u32, k: u32) -> Result<LawReport> {
    require_even(k)?;
    if pool.is_empty() || ell == 0 {
        return Err(ApcError::Precondition("need a nonempty pool and ℓ ≥ 1".into()));
    }
    let m_dim = pool[0].len();
    if m_dim == 0 || pool.iter().any(|v| v.len() != m_dim) {
        return Err(ApcError::Precondition("pool rows must share a positive length".into()));
    }
    let l = pool.len() as i64;
    let big = |x: i64| BigRational::from_bigint_ratio(BigInt::from(x), BigInt::from(1));

    // M = E∥v_1∥_k^k = (1/(m·L)) Σ_j Σ_rows v(j)^k.
    let mut m_bound = BigRational::zero();
    for row in pool {
        for &x in row {
            m_bound = m_bound + big(x as i64).powu(k);
        }
    }
    m_bound = m_bound / big(l * m_dim as i64);

    // Per coordinate j: centered draw (scaled by L) is c = L·v(j) − Σ_rows v(j),
    // an integer. DP over the exact counting distribution of Σ_i c_i.
    let mut expect_sum = BigRational::zero(); // Σ_j E[(Σ_i w_i(j))^k], w scaled by L
    for j in 0..m_dim {
        let col_sum: i64 = pool.iter().map(|v| v[j] as i64).sum();
        let offsets: Vec<i64> = pool.iter().map(|v| l * v[j] as i64 - col_sum).collect();
        let spread = offsets.iter().map(|c| c.unsigned_abs()).max().unwrap() as usize;
        let width = 2 * spread * ell as usize + 1;
        let zero_at = spread * ell as usize; // index of sum 0
        let mut counts = vec![BigInt::from(0); width];
        counts[zero_at] = BigInt::from(1);
        for _ in 0..ell {
            let mut next = vec![BigInt::from(0); width];
            for (idx, cnt) in counts.iter().enumerate() {
                if cnt.sign() == num_bigint::Sign::NoSign {
                    continue;
                }
                for &c in &offsets {
                    let tgt = idx as i64 + c;
                    next[tgt as usize] += cnt;
                }
            }
            counts = next;
        }
        let mut ek = BigRational::zero(); // E[(scaled sum)^k] · L^ℓ
        for (idx, cnt) in counts.iter().enumerate() {
            if cnt.sign() == num_bigint::Sign::NoSign {
                continue;
            }
            let val = idx as i64 - zero_at as i64;
            ek = ek + BigRational::from_bigint_ratio(cnt.clone(), BigInt::from(1))
                * big(val).powu(k);
        }
        let total = BigRational::from_bigint_ratio(BigInt::from(l).pow(ell), BigInt::from(1));
        // Undo both scalings: the L from centering and the 1/ℓ in v.
        expect_sum = expect_sum + ek / total / big(l).powu(k);
    }
    let lhs = expect_sum / big(m_dim as i64) / big(ell as i64).powu(k);
    let rhs = (big(k as i64) / big(ell as i64)).powu(k / 2) * m_bound;
    let line = check_le(
        format!("E∥(1/ℓ)Σ(v_i−μ)∥_{k}^{k} vs (k/ℓ)^{}·M  (ℓ={ell})", k / 2),
        &lhs,
        &rhs,
    );
    Ok(finish("khintchine", vec![line]))
}

fn require_even(k: u32) -> Result<()> {
    if k == 0 || k % 2 != 0 {
        return Err(ApcError::Precondition(format!("need an even k ≥ 2, got {k}")));
    }
    Ok(())
}

fn require_density<S: Scalar>(d: &RealFn<S>) -> Result<()> {
    if !d.is_density() {
        return Err(ApcError::Precondition(
            "weight must be a density (nonnegative, mean 1)".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Instance generators, shared by the verification suites and the CLI.

/// Random signed function with values on the grid n/8, n ∈ [−16,16], so the
/// same instance is representable in both backends.
pub fn gen_signed<S: Scalar>(rng: &mut ChaCha8Rng, g: &GroupSpec) -> RealFn<S> {
    let values = (0..g.order())
        .map(|_| S::from_ratio(rng.below(33) as i64 - 16, 8))
        .collect();
    RealFn::new(g, values).unwrap()
}

/// Random density: nonnegative grid values, normalized exactly.
pub fn gen_density<S: Scalar>(rng: &mut ChaCha8Rng, g: &GroupSpec) -> RealFn<S> {
    loop {
        let f: RealFn<S> = RealFn::new(
            g,
            (0..g.order()).map(|_| S::from_ratio(rng.below(17) as i64, 4)).collect(),
        )
        .unwrap();
        let mean = f.expectation();
        if mean > S::zero() {
            return f.map(|v| v.clone() / mean.clone());
        }
    }
}

/// Random spectrally positive density, built as a normalized
/// autocorrelation `g⋆g / (E g)²` of a nonnegative g — positive by
/// construction in either backend, no transform needed.
pub fn gen_positive_density<S: Scalar>(rng: &mut ChaCha8Rng, g: &GroupSpec) -> RealFn<S> {
    loop {
        let base: RealFn<S> = RealFn::new(
            g,
            (0..g.order()).map(|_| S::from_ratio(rng.below(5) as i64, 2)).collect(),
        )
        .unwrap();
        let mean = base.expectation();
        if mean > S::zero() {
            let auto = base.crosscorr(&base);
            return auto.map(|v| v.clone() / (mean.clone() * mean.clone()));
        }
    }
}

/// Density of a random nonempty subset.
pub fn gen_set_density<S: Scalar>(rng: &mut ChaCha8Rng, g: &GroupSpec, p: f64) -> RealFn<S> {
    let a = random_nonempty_subset(rng, g, p);
    crate::harmonic::indicator_density(&a).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;
    use crate::seeding::stage_rng;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn decoupling_holds_exactly_on_random_grid_functions() {
        let mut rng = stage_rng(2, "law-decoupling");
        let g = make_group(&[6]).unwrap();
        for _ in 0..8 {
            let f: RealFn<BigRational> = gen_signed(&mut rng, &g);
            let h: RealFn<BigRational> = gen_signed(&mut rng, &g);
            for k in [2, 4] {
                let rep = decoupling(&f, &h, k).unwrap();
                assert!(rep.holds, "{rep:?}");
            }
        }
    }

    #[test]
    fn positive_correlation_holds_for_autocorrelations_and_can_fail_otherwise() {
        let mut rng = stage_rng(3, "law-poscorr");
        let g = make_group(&[2, 2, 2]).unwrap();
        for m in 1..=3usize {
            let fs: Vec<RealFn<BigRational>> =
                (0..m).map(|_| gen_positive_density(&mut rng, &g)).collect();
            assert!(positive_correlation(&fs).unwrap().holds);
        }
        // Negative control: without spectral positivity the inequality is
        // simply false. f=(0,2), g=(2,0) on Z_2: E[fg]=0 < E[f]E[g]=1.
        let z2 = make_group(&[2]).unwrap();
        let f = RealFn::new(&z2, vec![q(0, 1), q(2, 1)]).unwrap();
        let h = RealFn::new(&z2, vec![q(2, 1), q(0, 1)]).unwrap();
        assert!(!positive_correlation(&[f, h]).unwrap().holds);
    }

    #[test]
    fn odd_central_moments_and_negative_control() {
        let mut rng = stage_rng(4, "law-oddmoments");
        let g = make_group(&[3, 3]).unwrap();
        for _ in 0..6 {
            let d: RealFn<BigRational> = gen_positive_density(&mut rng, &g);
            assert!(odd_central_moments(&d, 7).unwrap().holds);
        }
        // D = (3/2,3/2,0) on Z_3 is a density but not spectrally positive;
        // its third central moment is −1/4.
        let z3 = make_group(&[3]).unwrap();
        let d = RealFn::new(&z3, vec![q(3, 2), q(3, 2), q(0, 1)]).unwrap();
        let rep = odd_central_moments(&d, 3).unwrap();
        assert!(!rep.holds);
        assert!((rep.checks[0].margin + 0.25).abs() < 1e-12);
    }

    #[test]
    fn odd_moments_bound_on_a_two_point_distribution() {
        // X on Z_4 with values (2,2,0,0): E(X−1)^odd = 0 ≥ 0,
        // E|X−1|^2 = 1 so ε = 1/2 is admissible; check k′ ≥ 2k0/ε = 8.
        let g = make_group(&[4]).unwrap();
        let x = RealFn::new(&g, vec![q(2, 1), q(2, 1), q(0, 1), q(0, 1)]).unwrap();
        let rep = odd_moments_bound(&x, 2, &q(1, 2), &[8, 9, 12]).unwrap();
        assert!(rep.holds, "{rep:?}");
        // Below the threshold the precondition is rejected.
        assert!(odd_moments_bound(&x, 2, &q(1, 2), &[7]).is_err());
    }

    #[test]
    fn local_laws_hold_with_positive_weights() {
        let mut rng = stage_rng(5, "law-local");
        let g = make_group(&[5]).unwrap();
        for _ in 0..6 {
            let f: RealFn<BigRational> = gen_signed(&mut rng, &g);
            let h: RealFn<BigRational> = gen_signed(&mut rng, &g);
            let w: RealFn<BigRational> = gen_positive_density(&mut rng, &g);
            let theta = rng.below(g.order());
            assert!(local_decoupling(&f, &h, &w, theta, 2).unwrap().holds);
            let a: RealFn<BigRational> = gen_set_density(&mut rng, &g, 0.5);
            assert!(local_translate_transfer(&a, &w, theta, 2).unwrap().holds);
        }
    }

    #[test]
    fn local_upper_to_lower_on_a_structured_set() {
        // A = {0,1} ⊂ Z_5 against the uniform weight: ⟨1,(A⋆A−1)²⟩ = 7/8
        // ≥ (1/2)², so ε = 1/2 works with k=2, k′ = 8.
        let g = make_group(&[5]).unwrap();
        let a: RealFn<BigRational> =
            crate::harmonic::indicator_density(&crate::group::GroupSet::new(&g, &[0, 1]).unwrap())
                .unwrap();
        let w = RealFn::one(&g);
        let rep = local_upper_to_lower(&a, &w, 2, &q(1, 2), 8).unwrap();
        assert!(rep.holds, "{rep:?}");
    }

    #[test]
    fn compressions_escape_all_levels() {
        let mut rng = stage_rng(6, "law-compress");
        let g = make_group(&[7]).unwrap();
        for _ in 0..6 {
            let d: RealFn<BigRational> = gen_density(&mut rng, &g);
            for k in [2, 3] {
                for (eps, c) in [(q(1, 2), q(1, 4)), (q(1, 4), q(1, 2)), (q(0, 1), q(1, 1))] {
                    let rep = compressions_escape(&d, k, &eps, &c).unwrap();
                    assert!(rep.holds, "{rep:?}");
                }
            }
        }
    }

    #[test]
    fn bs_infnorm_is_unconditional_and_tight_on_point_masses() {
        let mut rng = stage_rng(7, "law-bs");
        let g = make_group(&[6]).unwrap();
        for _ in 0..8 {
            let d: RealFn<BigRational> = gen_density(&mut rng, &g);
            let dp: RealFn<BigRational> = gen_density(&mut rng, &g);
            assert!(bs_infnorm(&d, &dp).unwrap().holds);
        }
        // Point masses on Z_2 meet the bound with equality.
        let z2 = make_group(&[2]).unwrap();
        let d = RealFn::new(&z2, vec![q(2, 1), q(0, 1)]).unwrap();
        let rep = bs_infnorm(&d, &d).unwrap();
        assert!(rep.holds);
        assert!(rep.checks[0].margin.abs() < 1e-12);
    }

    #[test]
    fn khintchine_margin_is_nonnegative_on_small_pools() {
        let pools: Vec<Vec<Vec<u32>>> = vec![
            vec![vec![0, 3], vec![3, 0]],
            vec![vec![1, 1, 4], vec![0, 2, 0], vec![2, 0, 1]],
            vec![vec![5], vec![0], vec![1], vec![2]],
        ];
        for pool in &pools {
            for ell in [1u32, 2, 4, 8] {
                for k in [2u32, 4] {
                    let rep = khintchine_exact(pool, ell, k).unwrap();
                    assert!(rep.holds, "pool={pool:?} ℓ={ell} k={k}: {rep:?}");
                }
            }
        }
    }
}
