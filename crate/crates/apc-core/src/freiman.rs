//! Order-`t` homomorphism certificates for explicit finite maps, plus the
//! "safe box" construction that controls modular wraparound when a box in
//! `Z^r` is reduced into `Z_{N_1} × … × Z_{N_r}`.
//!
//! A map `φ : A → G'` is an order-`t` homomorphism when equal `t`-fold sums of
//! images force equal `t`-fold sums of preimages. [`check_freiman`] certifies
//! this property exhaustively (or refutes it with a concrete pair of
//! `t`-tuples); maps are always materialized as explicit tables because the
//! failure modes live in the fine detail of how a formula is restricted — the
//! classic refutation is the mod-`N` reduction on `{1} ∪ {N−1, N}`, whose
//! double sums hit two different multiples of `N`.
//!
//! [`safe_box`] packages the positive result: inside the upper portion
//! `∏ [2δN_i, N_i]` of the integer box, the coordinate-wise mod reduction is an
//! order-`t` homomorphism on the pullback of any translate of a small product
//! set, provided `t ≤ 1/δ`. Every claim is re-checked per translate.

use crate::error::ApcError;
use crate::group::{make_group, GroupSet, GroupSpec};
use crate::seeding::{stage_rng, RngExt};
use crate::sifting::exact_f64;
use crate::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::collections::HashMap;

/// Work cap for exhaustive tuple checking: number of `t`-multisets times `t`.
pub const FREIMAN_WORK_CAP: u128 = 20_000_000;

/// Ambient group in which the endpoints of a map live: the free lattice `Z^r`
/// or a product of cyclic groups. Points are coordinate vectors; modular
/// coordinates are kept reduced to `[0, N_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ambient {
    Lattice { dim: usize },
    Modular { moduli: Vec<u64> },
}

impl Ambient {
    pub fn lattice(dim: usize) -> Self {
        Ambient::Lattice { dim }
    }

    pub fn modular(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() || moduli.iter().any(|&n| n == 0) {
            return Err(ApcError::Precondition(
                "modular ambient needs nonempty positive moduli".into(),
            ));
        }
        Ok(Ambient::Modular {
            moduli: moduli.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Ambient::Lattice { dim } => *dim,
            Ambient::Modular { moduli } => moduli.len(),
        }
    }

    fn reduce(&self, v: &mut [i64]) {
        if let Ambient::Modular { moduli } = self {
            for (x, &n) in v.iter_mut().zip(moduli) {
                *x = x.rem_euclid(n as i64);
            }
        }
    }

    fn reduced(&self, v: &[i64]) -> Vec<i64> {
        let mut out = v.to_vec();
        self.reduce(&mut out);
        out
    }

    /// Sum of the given points, reduced.
    fn sum<'a>(&self, pts: impl Iterator<Item = &'a [i64]>) -> Vec<i64> {
        let mut acc = vec![0i64; self.dim()];
        for p in pts {
            for (a, x) in acc.iter_mut().zip(p) {
                *a += *x;
            }
        }
        self.reduce(&mut acc);
        acc
    }
}

/// A map between ambient groups, stored as an explicit table sorted by key.
#[derive(Clone, Debug)]
pub struct FreimanMap {
    domain: Ambient,
    codomain: Ambient,
    pairs: Vec<(Vec<i64>, Vec<i64>)>,
}

impl FreimanMap {
    /// Build from `(point, image)` pairs. Exact duplicates collapse; a key
    /// mapped to two different images is rejected (the table would not be a
    /// function).
    pub fn from_pairs(
        domain: Ambient,
        codomain: Ambient,
        pairs: Vec<(Vec<i64>, Vec<i64>)>,
    ) -> Result<Self> {
        let mut table: Vec<(Vec<i64>, Vec<i64>)> = Vec::with_capacity(pairs.len());
        for (x, y) in pairs {
            if x.len() != domain.dim() || y.len() != codomain.dim() {
                return Err(ApcError::Precondition(format!(
                    "map pair dimension mismatch: point has {} coords, image {}, expected {}/{}",
                    x.len(),
                    y.len(),
                    domain.dim(),
                    codomain.dim()
                )));
            }
            table.push((domain.reduced(&x), codomain.reduced(&y)));
        }
        table.sort();
        table.dedup();
        for w in table.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ApcError::Precondition(format!(
                    "point {:?} has two distinct images",
                    w[0].0
                )));
            }
        }
        Ok(FreimanMap {
            domain,
            codomain,
            pairs: table,
        })
    }

    /// The one-dimensional reduction `x ↦ x mod n` on an explicit point set.
    pub fn mod_reduction(points: &[i64], n: u64) -> Result<Self> {
        let pairs = points.iter().map(|&x| (vec![x], vec![x])).collect();
        FreimanMap::from_pairs(Ambient::lattice(1), Ambient::modular(&[n])?, pairs)
    }

    pub fn domain(&self) -> &Ambient {
        &self.domain
    }

    pub fn codomain(&self) -> &Ambient {
        &self.codomain
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Vec<i64>, Vec<i64>)] {
        &self.pairs
    }

    /// Image of a point, if it is in the table.
    pub fn value(&self, x: &[i64]) -> Option<&[i64]> {
        let key = self.domain.reduced(x);
        self.pairs
            .binary_search_by(|(k, _)| k.as_slice().cmp(key.as_slice()))
            .ok()
            .map(|i| self.pairs[i].1.as_slice())
    }

    /// Composition `x ↦ other(self(x))`, kept on the pairs whose intermediate
    /// value lies in `other`'s table (partial maps compose on the pullback).
    /// Homomorphism properties do not compose automatically — re-certify the
    /// result with [`check_freiman`] if they matter downstream.
    pub fn then(&self, other: &FreimanMap) -> Result<FreimanMap> {
        if self.codomain.dim() != other.domain.dim() {
            return Err(ApcError::Precondition(format!(
                "composition dimension mismatch: intermediate has {} coords, next domain {}",
                self.codomain.dim(),
                other.domain.dim()
            )));
        }
        let pairs: Vec<(Vec<i64>, Vec<i64>)> = self
            .pairs
            .iter()
            .filter_map(|(x, y)| other.value(y).map(|z| (x.clone(), z.to_vec())))
            .collect();
        if pairs.is_empty() {
            return Err(ApcError::Precondition(
                "composition has empty domain — no intermediate value survives".into(),
            ));
        }
        FreimanMap::from_pairs(self.domain.clone(), other.codomain.clone(), pairs)
    }
}

/// How much tuple-checking work [`check_freiman`] may do.
#[derive(Clone, Debug)]
pub enum FreimanBudget {
    /// Every `t`-multiset of the domain (collisions between multiset sums
    /// cover collisions between arbitrary tuples, since sums are
    /// order-invariant).
    Exhaustive,
    /// Random `t`-multisets only. Never yields a certificate.
    Sampled { tuples: usize, seed: u64 },
}

/// A refuting pair: two `t`-tuples with equal image sums but distinct
/// preimage sums.
#[derive(Clone, Debug)]
pub struct FreimanCounterexample {
    pub left: Vec<Vec<i64>>,
    pub right: Vec<Vec<i64>>,
    pub image_sum: Vec<i64>,
    pub left_sum: Vec<i64>,
    pub right_sum: Vec<i64>,
}

/// Outcome of an order-`t` homomorphism check. `verified` is set only by a
/// completed exhaustive pass; sampled verdicts are explicitly non-certificates.
#[derive(Clone, Debug)]
pub struct FreimanCert {
    pub map: FreimanMap,
    pub order: usize,
    pub verified: bool,
    pub exhaustive: bool,
    pub tuples_checked: u64,
    pub counterexample: Option<FreimanCounterexample>,
    pub note: String,
}

impl FreimanCert {
    /// Re-verify the stored counterexample against the table: equal image
    /// sums, distinct preimage sums. `None` when there is no counterexample.
    pub fn counterexample_holds(&self) -> Option<bool> {
        let ce = self.counterexample.as_ref()?;
        let image = |pts: &[Vec<i64>]| -> Option<Vec<i64>> {
            let vals: Option<Vec<&[i64]>> = pts.iter().map(|p| self.map.value(p)).collect();
            Some(self.map.codomain.sum(vals?.into_iter()))
        };
        let (li, ri) = match (image(&ce.left), image(&ce.right)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Some(false),
        };
        let ls = self.map.domain.sum(ce.left.iter().map(|p| p.as_slice()));
        let rs = self.map.domain.sum(ce.right.iter().map(|p| p.as_slice()));
        Some(li == ri && ls != rs)
    }
}

fn multiset_count(n: u128, t: u128) -> Option<u128> {
    // C(n + t − 1, t), exact in u128.
    if n == 0 {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for j in 0..t {
        acc = acc.checked_mul(n - 1 + t - j)?;
        acc /= j + 1; // divides exactly at each partial product
    }
    Some(acc)
}

/// Check whether the map is an order-`t` homomorphism.
///
/// The exhaustive mode walks all nondecreasing index `t`-tuples and hashes the
/// image sum; two multisets with the same image sum but different preimage
/// sums refute the property and are returned verbatim. Since tuple sums only
/// depend on the underlying multiset, this covers the full `|A|^{2t}` tuple
/// space at multiset cost.
pub fn check_freiman(map: &FreimanMap, t: usize, budget: &FreimanBudget) -> Result<FreimanCert> {
    if t == 0 {
        return Err(ApcError::Precondition("homomorphism order must be ≥ 1".into()));
    }
    let n = map.len();
    if n == 0 {
        return Ok(FreimanCert {
            map: map.clone(),
            order: t,
            verified: true,
            exhaustive: true,
            tuples_checked: 0,
            counterexample: None,
            note: "empty domain: property holds vacuously".into(),
        });
    }

    // image-sum → (preimage sum, witness index tuple)
    let mut seen: HashMap<Vec<i64>, (Vec<i64>, Vec<usize>)> = HashMap::new();
    let mut checked: u64 = 0;
    let mut counterexample = None;

    let process = |idx: &[usize],
                       seen: &mut HashMap<Vec<i64>, (Vec<i64>, Vec<usize>)>|
     -> Option<FreimanCounterexample> {
        let phi_sum = map
            .codomain
            .sum(idx.iter().map(|&i| map.pairs[i].1.as_slice()));
        let x_sum = map
            .domain
            .sum(idx.iter().map(|&i| map.pairs[i].0.as_slice()));
        match seen.get(&phi_sum) {
            Some((prev_sum, prev_idx)) if *prev_sum != x_sum => Some(FreimanCounterexample {
                left: prev_idx.iter().map(|&i| map.pairs[i].0.clone()).collect(),
                right: idx.iter().map(|&i| map.pairs[i].0.clone()).collect(),
                image_sum: phi_sum,
                left_sum: prev_sum.clone(),
                right_sum: x_sum,
            }),
            Some(_) => None,
            None => {
                seen.insert(phi_sum, (x_sum, idx.to_vec()));
                None
            }
        }
    };

    match budget {
        FreimanBudget::Exhaustive => {
            let count = multiset_count(n as u128, t as u128)
                .filter(|c| c.saturating_mul(t as u128) <= FREIMAN_WORK_CAP);
            if count.is_none() {
                return Err(ApcError::Budget(format!(
                    "order-{t} check over {n} points exceeds the tuple cap; use sampled mode"
                )));
            }
            // nondecreasing index odometer
            let mut idx = vec![0usize; t];
            loop {
                checked += 1;
                if let Some(ce) = process(&idx, &mut seen) {
                    counterexample = Some(ce);
                    break;
                }
                let mut j = t;
                while j > 0 && idx[j - 1] == n - 1 {
                    j -= 1;
                }
                if j == 0 {
                    break;
                }
                let v = idx[j - 1] + 1;
                for slot in idx.iter_mut().skip(j - 1) {
                    *slot = v;
                }
            }
            let verified = counterexample.is_none();
            Ok(FreimanCert {
                map: map.clone(),
                order: t,
                verified,
                exhaustive: true,
                tuples_checked: checked,
                counterexample,
                note: if verified {
                    format!("all {checked} multisets of size {t} have consistent sums")
                } else {
                    "refuted by explicit tuple pair".into()
                },
            })
        }
        FreimanBudget::Sampled { tuples, seed } => {
            let mut rng = stage_rng(*seed, "freiman/sampled");
            for _ in 0..*tuples {
                let mut idx: Vec<usize> = (0..t).map(|_| rng.below(n)).collect();
                idx.sort_unstable();
                checked += 1;
                if let Some(ce) = process(&idx, &mut seen) {
                    counterexample = Some(ce);
                    break;
                }
            }
            let refuted = counterexample.is_some();
            Ok(FreimanCert {
                map: map.clone(),
                order: t,
                verified: false,
                exhaustive: false,
                tuples_checked: checked,
                counterexample,
                note: if refuted {
                    "refuted by explicit tuple pair (sampled search)".into()
                } else {
                    "sampled pass only — not a certificate".into()
                },
            })
        }
    }
}

/// Upper portion of the integer interval `[a, b]`: `[a + 2δ(b−a), b]`,
/// returned as the integer endpoints `(⌈a + 2δ(b−a)⌉, b)`.
pub fn interval_upper_portion(a: i64, b: i64, delta: f64) -> Result<(i64, i64)> {
    let d = exact_f64(delta)?;
    let lo = BigRational::from_integer(BigInt::from(a))
        + BigRational::from_integer(BigInt::from(2)) * &d * BigRational::from_integer(BigInt::from(b - a));
    Ok((rat_ceil_i64(&lo), b))
}

/// Middle slice of the integer interval `[a, b]`:
/// `[a + (b−a)/2 + 1, a + (1/2 + δ)(b−a)]`, as integer endpoints
/// `(⌈lo⌉, ⌊hi⌋)`. May be empty for small intervals.
pub fn interval_middle_slice(a: i64, b: i64, delta: f64) -> Result<(i64, i64)> {
    let d = exact_f64(delta)?;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let len = BigRational::from_integer(BigInt::from(b - a));
    let lo = BigRational::from_integer(BigInt::from(a)) + &half * &len + BigRational::one();
    let hi = BigRational::from_integer(BigInt::from(a)) + (half + d) * &len;
    Ok((rat_ceil_i64(&lo), rat_floor_i64(&hi)))
}

fn rat_ceil_i64(x: &BigRational) -> i64 {
    x.ceil().to_integer().to_i64().expect("endpoint fits i64")
}

fn rat_floor_i64(x: &BigRational) -> i64 {
    x.floor().to_integer().to_i64().expect("endpoint fits i64")
}

/// Geometry of a safe box instance over `∏ [N_i]`.
///
/// Two slightly different "upper portion" conventions exist: the product form
/// `∏ [2δN_i, N_i]` used in the safety certificate (stored here as `upper`),
/// and the generic interval form `[a + 2δ(b−a), b]` (available through
/// [`interval_upper_portion`]). They differ by at most one at the left
/// endpoint; each use site gets the form written for it, and the product form
/// is the one satisfying `|U|/|P| ≥ 1 − 2δr` below.
#[derive(Clone, Debug)]
pub struct SafeSpec {
    pub lengths: Vec<u64>,
    pub delta: f64,
    /// `U_i = [⌈2δN_i⌉, N_i]` per coordinate (1-based boxes).
    pub upper: Vec<(i64, i64)>,
    /// Middle slice of `[1, N_i]` per coordinate.
    pub middle: Vec<(i64, i64)>,
    /// `v_i = ⌊(1/2 + δ/2) N_i⌋` — the designated center used downstream.
    pub center: Vec<i64>,
    /// The requested interval sizes `m_i` of the product set.
    pub halfwidths: Vec<u64>,
    /// `|U| / ∏N_i`, exact.
    pub upper_fraction: BigRational,
    /// `1 − 2δr`, exact in the rational value of the given `δ`.
    pub fraction_bound: BigRational,
    pub fraction_ok: bool,
}

/// How translates `θ` are enumerated when certifying a safe box.
#[derive(Clone, Debug)]
pub enum ThetaMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

/// Pullback of a translate of one interval through `x ↦ x mod N`, classified
/// as one genuine interval or the wrap split `[1, b] ∪ [a, N]`.
#[derive(Clone, Debug)]
pub struct PullbackClass {
    pub pieces: Vec<(i64, i64)>,
    pub split: bool,
}

/// One translate check: the homomorphism property of the reduction restricted
/// to `φ⁻¹(B + θ) ∩ U`.
#[derive(Clone, Debug)]
pub struct ThetaCheck {
    pub theta: Vec<i64>,
    pub pullbacks: Vec<PullbackClass>,
    pub domain_size: usize,
    pub verified: bool,
    pub counterexample: Option<FreimanCounterexample>,
}

/// Full safe-box certificate.
#[derive(Clone, Debug)]
pub struct SafeBoxReport {
    /// The product set `B = ∏ ({1..m_i} mod N_i)` inside `∏ Z_{N_i}`.
    pub set: GroupSet,
    pub group: GroupSpec,
    pub spec: SafeSpec,
    pub order: usize,
    pub checks: Vec<ThetaCheck>,
    pub thetas_exhaustive: bool,
    pub all_verified: bool,
}

/// Build the safe product set `B = ∏ ({1..m_i} mod N_i)` and certify that the
/// coordinate-wise reduction `φ(x) = x mod (N_1..N_r)` is an order-`t`
/// homomorphism on `φ⁻¹(B + θ) ∩ U` for every checked translate `θ`, where
/// `U = ∏ [2δN_i, N_i]`.
///
/// Preconditions: `δ ∈ (0, 1/2]`, `m_i ≤ δ N_i`, `1 ≤ t ≤ 1/δ`.
pub fn safe_box(
    lengths: &[u64],
    delta: f64,
    halfwidths: &[u64],
    t: usize,
    mode: &ThetaMode,
) -> Result<SafeBoxReport> {
    let r = lengths.len();
    if r == 0 || halfwidths.len() != r {
        return Err(ApcError::Precondition(
            "need matching nonempty lengths and halfwidths".into(),
        ));
    }
    if lengths.iter().any(|&n| n < 2) {
        return Err(ApcError::Precondition("box lengths must be ≥ 2".into()));
    }
    if !delta.is_finite() || delta <= 0.0 || delta > 0.5 {
        return Err(ApcError::Precondition(format!(
            "δ = {delta} outside (0, 1/2]"
        )));
    }
    if t == 0 {
        return Err(ApcError::Precondition("order t must be ≥ 1".into()));
    }
    let d = exact_f64(delta)?;
    let t_rat = BigRational::from_integer(BigInt::from(t as i64));
    if &t_rat * &d > BigRational::one() {
        return Err(ApcError::Precondition(format!(
            "order t = {t} exceeds 1/δ = {:.3}",
            1.0 / delta
        )));
    }
    for (&m, &n) in halfwidths.iter().zip(lengths) {
        let bound = &d * BigRational::from_integer(BigInt::from(n as i64));
        if BigRational::from_integer(BigInt::from(m as i64)) > bound {
            return Err(ApcError::Precondition(format!(
                "interval size m = {m} exceeds δN = {}",
                bound
            )));
        }
    }
    let order: u128 = lengths.iter().map(|&n| n as u128).product();
    if order > crate::EXACT_ORDER_CAP as u128 {
        return Err(ApcError::Budget(format!(
            "box volume {order} exceeds the exact-enumeration cap {}",
            crate::EXACT_ORDER_CAP
        )));
    }
    let moduli: Vec<u32> = lengths.iter().map(|&n| n as u32).collect();
    let group = make_group(&moduli)?;

    // Geometry.
    let two = BigRational::from_integer(BigInt::from(2));
    let mut upper = Vec::with_capacity(r);
    let mut middle = Vec::with_capacity(r);
    let mut center = Vec::with_capacity(r);
    let mut u_count = BigRational::one();
    for &n in lengths {
        let n_rat = BigRational::from_integer(BigInt::from(n as i64));
        let lo = rat_ceil_i64(&(&two * &d * &n_rat)).max(1);
        upper.push((lo, n as i64));
        u_count *= BigRational::from_integer(BigInt::from(n as i64 - lo + 1));
        middle.push(interval_middle_slice(1, n as i64, delta)?);
        let v = (BigRational::new(BigInt::from(1), BigInt::from(2)) + &d / &two) * &n_rat;
        center.push(rat_floor_i64(&v));
    }
    let total = BigRational::from_integer(lengths.iter().map(|&n| BigInt::from(n)).product());
    let upper_fraction = u_count / total;
    let fraction_bound =
        BigRational::one() - &two * &d * BigRational::from_integer(BigInt::from(r as i64));
    let fraction_ok = upper_fraction >= fraction_bound;
    let spec = SafeSpec {
        lengths: lengths.to_vec(),
        delta,
        upper: upper.clone(),
        middle,
        center,
        halfwidths: halfwidths.to_vec(),
        upper_fraction,
        fraction_bound,
        fraction_ok,
    };

    // The product set B itself, as residue vectors {1..m_i} (no wrap: m_i < N_i).
    let mut b_members = vec![Vec::new()];
    for (&m, &_n) in halfwidths.iter().zip(lengths) {
        let mut next = Vec::new();
        for base in &b_members {
            for j in 1..=m as i64 {
                let mut v: Vec<i64> = base.clone();
                v.push(j);
                next.push(v);
            }
        }
        b_members = next;
    }
    let b_indices: Vec<usize> = b_members
        .iter()
        .map(|v| {
            let coords: Vec<u32> = v.iter().map(|&c| c as u32).collect();
            group.index_of(&coords)
        })
        .collect();
    let set = GroupSet::new(&group, &b_indices)?;

    // Translates to check.
    let thetas: Vec<usize> = match mode {
        ThetaMode::Exhaustive => group.elements().collect(),
        ThetaMode::Sampled { count, seed } => {
            let mut rng = stage_rng(*seed, "safe-box/thetas");
            (0..*count).map(|_| rng.below(group.order())).collect()
        }
    };

    let mut checks = Vec::with_capacity(thetas.len());
    let mut all_verified = true;
    for theta_idx in thetas {
        let tc = group.coords_of(theta_idx);
        let theta: Vec<i64> = tc.iter().map(|&c| c as i64).collect();

        // Per-coordinate pullback of B_i + θ_i through x ↦ x mod N_i,
        // classified into at most two genuine intervals of [1, N_i].
        let mut pullbacks = Vec::with_capacity(r);
        let mut axes: Vec<Vec<i64>> = Vec::with_capacity(r);
        for i in 0..r {
            let n = lengths[i] as i64;
            let mut pts: Vec<i64> = (1..=halfwidths[i] as i64)
                .map(|j| {
                    let v = (j + theta[i]).rem_euclid(n);
                    if v == 0 {
                        n
                    } else {
                        v
                    }
                })
                .collect();
            pts.sort_unstable();
            let mut pieces: Vec<(i64, i64)> = Vec::new();
            for &p in &pts {
                match pieces.last_mut() {
                    Some(run) if run.1 + 1 == p => run.1 = p,
                    _ => pieces.push((p, p)),
                }
            }
            debug_assert!(pieces.len() <= 2, "pullback splits into at most two runs");
            pullbacks.push(PullbackClass {
                split: pieces.len() > 1,
                pieces,
            });
            axes.push(pts.into_iter().filter(|&p| p >= upper[i].0).collect());
        }

        // Cartesian product of the U-filtered axes → explicit map table.
        let mut domain = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(domain.len() * axis.len());
            for base in &domain {
                for &p in axis {
                    let mut v: Vec<i64> = base.clone();
                    v.push(p);
                    next.push(v);
                }
            }
            domain = next;
        }
        let pairs: Vec<(Vec<i64>, Vec<i64>)> =
            domain.into_iter().map(|x| (x.clone(), x)).collect();
        let map = FreimanMap::from_pairs(
            Ambient::lattice(r),
            Ambient::modular(lengths)?,
            pairs,
        )?;
        let cert = check_freiman(&map, t, &FreimanBudget::Exhaustive)?;
        all_verified &= cert.verified;
        checks.push(ThetaCheck {
            theta,
            pullbacks,
            domain_size: map.len(),
            verified: cert.verified,
            counterexample: cert.counterexample,
        });
    }

    Ok(SafeBoxReport {
        set,
        group,
        spec,
        order: t,
        checks,
        thetas_exhaustive: matches!(mode, ThetaMode::Exhaustive),
        all_verified,
    })
}
