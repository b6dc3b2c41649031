//! Real-valued functions on a finite abelian group under the uniform-measure
//! normalization, plus representation counts under the counting measure.
//!
//! Conventions, used everywhere downstream:
//! * expectation `E f = (1/|G|) Σ_x f(x)`; inner product `⟨f,g⟩ = E f·g`;
//! * a *density* is a nonnegative function with `E f = 1`; a set `A` becomes
//!   the density `(|G|/|A|)·1_A`;
//! * convolution `(f∗g)(x) = E_y f(y) g(x−y)`; cross-correlation
//!   `(f⋆g)(x) = E_y f(y) g(x+y)`;
//! * k-norms `∥f∥_k = (E|f|^k)^{1/k}`; certified comparisons use the k-th
//!   powers so the exact backend stays rational.

pub mod fourier;
pub mod laws;

use crate::error::ApcError;
use crate::group::{GroupSet, GroupSpec};
use crate::scalar::Scalar;
use crate::Result;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// A function `G → S` stored densely in flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFn<S: Scalar> {
    group: GroupSpec,
    values: Vec<S>,
}

pub type RealF = RealFn<f64>;

impl<S: Scalar> RealFn<S> {
    pub fn new(group: &GroupSpec, values: Vec<S>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(ApcError::Precondition(format!(
                "function has {} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(RealFn { group: group.clone(), values })
    }

    pub fn constant(group: &GroupSpec, c: S) -> Self {
        RealFn { group: group.clone(), values: vec![c; group.order()] }
    }

    pub fn zero(group: &GroupSpec) -> Self {
        Self::constant(group, S::zero())
    }

    pub fn one(group: &GroupSpec) -> Self {
        Self::constant(group, S::one())
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn value(&self, x: usize) -> &S {
        &self.values[x]
    }

    pub fn expectation(&self) -> S {
        let mut acc = S::zero();
        for v in &self.values {
            acc = acc + v.clone();
        }
        acc / S::from_int(self.group.order() as i64)
    }

    /// Total mass `Σ_x f(x)` (counting measure).
    pub fn total(&self) -> S {
        let mut acc = S::zero();
        for v in &self.values {
            acc = acc + v.clone();
        }
        acc
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| v.is_nonnegative())
    }

    /// Checks `f ≥ 0` and `E f = 1` (exactly in rational mode, within 1e−9
    /// in float mode).
    pub fn is_density(&self) -> bool {
        if !self.is_nonnegative() {
            return false;
        }
        let m = self.expectation();
        if S::EXACT {
            m == S::one()
        } else {
            (m.to_f64() - 1.0).abs() <= 1e-9
        }
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        RealFn {
            group: self.group.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.clone() - b.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.clone() * b.clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn sub_const(&self, c: &S) -> Self {
        self.map(|v| v.clone() - c.clone())
    }

    fn zip(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!(self.group, other.group, "functions on different groups");
        RealFn {
            group: self.group.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn inner(&self, other: &Self) -> S {
        assert_eq!(self.group, other.group, "functions on different groups");
        let mut acc = S::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            acc = acc + a.clone() * b.clone();
        }
        acc / S::from_int(self.group.order() as i64)
    }

    /// `(T_t f)(x) = f(x − t)`.
    pub fn translate(&self, t: usize) -> Self {
        let table = self.group.translate_table(t);
        let mut values = vec![S::zero(); self.values.len()];
        for (x, &xt) in table.iter().enumerate() {
            values[xt] = self.values[x].clone();
        }
        RealFn { group: self.group.clone(), values }
    }

    /// `f(−x)`.
    pub fn reflect(&self) -> Self {
        let neg = self.group.negation_table();
        let mut values = vec![S::zero(); self.values.len()];
        for (x, &nx) in neg.iter().enumerate() {
            values[nx] = self.values[x].clone();
        }
        RealFn { group: self.group.clone(), values }
    }

    pub fn infnorm(&self) -> S {
        let mut best = S::zero();
        for v in &self.values {
            let a = v.abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    pub fn max_value(&self) -> S {
        let mut best = self.values[0].clone();
        for v in &self.values[1..] {
            if *v > best {
                best = v.clone();
            }
        }
        best
    }

    /// `E |f|^k` — the k-th power of the k-norm; rational in exact mode.
    pub fn knorm_pow(&self, k: u32) -> S {
        let mut acc = S::zero();
        for v in &self.values {
            acc = acc + v.abs().powu(k);
        }
        acc / S::from_int(self.group.order() as i64)
    }

    pub fn knorm(&self, k: u32) -> f64 {
        self.knorm_pow(k).to_f64().powf(1.0 / k as f64)
    }

    /// k-norm for real `k ≥ 1` (float evaluation).
    pub fn knorm_real(&self, k: f64) -> f64 {
        assert!(k >= 1.0);
        let g = self.group.order() as f64;
        let s: f64 = self.values.iter().map(|v| v.to_f64().abs().powf(k)).sum();
        (s / g).powf(1.0 / k)
    }

    /// `⟨w, |f|^k⟩` — k-th power of the weighted k-norm `∥f∥_{k,w}`.
    pub fn weighted_knorm_pow(&self, k: u32, weight: &Self) -> S {
        assert_eq!(self.group, weight.group);
        let mut acc = S::zero();
        for (v, w) in self.values.iter().zip(&weight.values) {
            acc = acc + w.clone() * v.abs().powu(k);
        }
        acc / S::from_int(self.group.order() as i64)
    }

    pub fn weighted_knorm(&self, k: u32, weight: &Self) -> f64 {
        self.weighted_knorm_pow(k, weight).to_f64().powf(1.0 / k as f64)
    }

    /// Convolution `(f∗g)(x) = E_y f(y) g(x−y)`.
    pub fn convolve(&self, other: &Self) -> Self {
        assert_eq!(self.group, other.group, "functions on different groups");
        let n = self.group.order();
        let mut values = vec![S::zero(); n];
        for y in 0..n {
            let fy = &self.values[y];
            if *fy == S::zero() {
                continue;
            }
            // x − y ranges over the translate table of −y applied to x.
            let table = self.group.translate_table(self.group.neg(y));
            for x in 0..n {
                let gv = &other.values[table[x]];
                if *gv == S::zero() {
                    continue;
                }
                values[x] = values[x].clone() + fy.clone() * gv.clone();
            }
        }
        let order = S::from_int(n as i64);
        RealFn {
            group: self.group.clone(),
            values: values.into_iter().map(|v| v / order.clone()).collect(),
        }
    }

    /// Cross-correlation `(f⋆g)(x) = E_y f(y) g(x+y)`.
    pub fn crosscorr(&self, other: &Self) -> Self {
        self.reflect().convolve(other)
    }

    /// Compression `f^{∧k} := f^k / E f^k` for a nonnegative `f` with
    /// `E f^k > 0`.
    pub fn compress(&self, k: u32) -> Result<Self> {
        if !self.is_nonnegative() {
            return Err(ApcError::Precondition("compression needs f ≥ 0".into()));
        }
        let powed = self.map(|v| v.powu(k));
        let mass = powed.expectation();
        if !(mass > S::zero()) {
            return Err(ApcError::Precondition("compression of the zero function".into()));
        }
        Ok(powed.map(|v| v.clone() / mass.clone()))
    }

    pub fn to_f64_fn(&self) -> RealF {
        RealFn {
            group: self.group.clone(),
            values: self.values.iter().map(|v| v.to_f64()).collect(),
        }
    }
}

impl RealF {
    /// Exact rational view (every finite f64 is a dyadic rational).
    pub fn to_exact(&self) -> Result<RealFn<num_rational::BigRational>> {
        let mut values = Vec::with_capacity(self.values.len());
        for &v in &self.values {
            let q = num_rational::BigRational::from_float(v).ok_or_else(|| {
                ApcError::Precondition(format!("non-finite value {v} cannot be made exact"))
            })?;
            values.push(q);
        }
        Ok(RealFn { group: self.group.clone(), values })
    }
}

/// The density `(|G|/|A|)·1_A` of a nonempty set.
pub fn indicator_density<S: Scalar>(set: &GroupSet) -> Result<RealFn<S>> {
    if set.is_empty() {
        return Err(ApcError::Precondition("indicator density of the empty set".into()));
    }
    let g = set.group();
    let value = S::from_int(g.order() as i64) / S::from_int(set.size() as i64);
    let mut values = vec![S::zero(); g.order()];
    for &m in set.members() {
        values[m] = value.clone();
    }
    Ok(RealFn { group: g.clone(), values })
}

/// The uniform probability mass function `π_A = 1_A/|A|` (counting-measure
/// distribution, sums to 1).
pub fn uniform_distribution<S: Scalar>(set: &GroupSet) -> Result<RealFn<S>> {
    if set.is_empty() {
        return Err(ApcError::Precondition("distribution on the empty set".into()));
    }
    let g = set.group();
    let value = S::one() / S::from_int(set.size() as i64);
    let mut values = vec![S::zero(); g.order()];
    for &m in set.members() {
        values[m] = value.clone();
    }
    Ok(RealFn { group: g.clone(), values })
}

/// Plain 0/1 indicator as a function.
pub fn indicator<S: Scalar>(set: &GroupSet) -> RealFn<S> {
    let g = set.group();
    let mut values = vec![S::zero(); g.order()];
    for &m in set.members() {
        values[m] = S::one();
    }
    RealFn { group: g.clone(), values }
}

/// Which representation count to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepKind {
    /// `R_{A,B}(x) = #{(a,b) ∈ A×B : a+b = x}`.
    Sum,
    /// `R⁻_{A,B}(x) = #{(a,b) ∈ A×B : a−b = x}`.
    Difference,
}

/// Exact representation counts over the counting measure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepCount {
    pub kind: RepKind,
    pub counts: Vec<u64>,
}

pub fn rep_counts(a: &GroupSet, b: &GroupSet, kind: RepKind) -> RepCount {
    assert_eq!(a.group(), b.group(), "sets in different groups");
    let g = a.group();
    let mut counts = vec![0u64; g.order()];
    for &x in a.members() {
        for &y in b.members() {
            let idx = match kind {
                RepKind::Sum => g.add(x, y),
                RepKind::Difference => g.sub(x, y),
            };
            counts[idx] += 1;
        }
    }
    RepCount { kind, counts }
}

pub fn rep_counts_self(a: &GroupSet, kind: RepKind) -> RepCount {
    rep_counts(a, a, kind)
}

impl RepCount {
    pub fn as_fn<S: Scalar>(&self, group: &GroupSpec) -> RealFn<S> {
        RealFn {
            group: group.clone(),
            values: self.counts.iter().map(|&c| S::from_int(c as i64)).collect(),
        }
    }

    /// `Σ_x count(x)^k` as a big integer (can be astronomically large for the
    /// k′ the witness drivers use).
    pub fn power_sum(&self, k: u32) -> BigInt {
        let mut acc = BigInt::from(0);
        for &c in &self.counts {
            if c > 0 {
                acc += BigInt::from(c).pow(k);
            }
        }
        acc
    }

    /// `Σ_x count(x)^k f(x)` for a scalar-valued f.
    pub fn power_weighted_sum<S: Scalar>(&self, k: u32, f: &RealFn<S>) -> S {
        let mut acc = S::zero();
        for (x, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                let cv = S::from_bigint_ratio(BigInt::from(c).pow(k), BigInt::from(1));
                acc = acc + cv * f.values[x].clone();
            }
        }
        acc
    }
}

/// Additive energy `E(A) = Σ_{x∈G} R⁻_A(x)²`.
pub fn energy(a: &GroupSet) -> u128 {
    let reps = rep_counts_self(a, RepKind::Difference);
    reps.counts.iter().map(|&c| (c as u128) * (c as u128)).sum()
}

/// k-norm divergence between two distributions (counting-measure sums):
/// `(Σ_x |π−π′|^k / Σ_x π′^k)^{1/k}`. Returns the k-th power (exact in
/// rational mode) together with the float root.
pub fn kdivergence<S: Scalar>(pi: &RealFn<S>, pi_prime: &RealFn<S>, k: u32) -> Result<(S, f64)> {
    if pi.group != pi_prime.group {
        return Err(ApcError::Precondition("distributions on different groups".into()));
    }
    if k == 0 {
        return Err(ApcError::Precondition("divergence needs k ≥ 1".into()));
    }
    let mut num = S::zero();
    let mut den = S::zero();
    for (a, b) in pi.values.iter().zip(&pi_prime.values) {
        num = num + (a.clone() - b.clone()).abs().powu(k);
        den = den + b.abs().powu(k);
    }
    if !(den > S::zero()) {
        return Err(ApcError::Precondition("reference distribution is zero".into()));
    }
    let pow = num / den;
    let root = pow.to_f64().powf(1.0 / k as f64);
    Ok((pow, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn set(group: &GroupSpec, members: &[usize]) -> GroupSet {
        GroupSet::new(group, members).unwrap()
    }

    /// Independent quadratic-loop oracle for the cross-correlation of a set
    /// density with itself.
    fn crosscorr_oracle(g: &GroupSpec, a: &[usize]) -> Vec<f64> {
        let delta = a.len() as f64 / g.order() as f64;
        let mut out = vec![0.0; g.order()];
        for x in g.elements() {
            let mut acc = 0.0;
            for y in g.elements() {
                let fy = if a.contains(&y) { 1.0 / delta } else { 0.0 };
                let gy = if a.contains(&g.add(x, y)) { 1.0 / delta } else { 0.0 };
                acc += fy * gy;
            }
            out[x] = acc / g.order() as f64;
        }
        out
    }

    #[test]
    fn frozen_difference_profile_on_z5() {
        // A = {0,1} ⊂ Z_5.
        let g = make_group(&[5]).unwrap();
        let a = set(&g, &[0, 1]);
        let d: RealFn<BigRational> = indicator_density(&a).unwrap();
        let corr = d.crosscorr(&d);
        let expect = [q(5, 2), q(5, 4), q(0, 1), q(0, 1), q(5, 4)];
        assert_eq!(corr.values(), &expect[..]);
        // Against the independent float oracle.
        let oracle = crosscorr_oracle(&g, &[0, 1]);
        for (v, o) in corr.values().iter().zip(&oracle) {
            assert!((v.to_f64() - o).abs() < 1e-12);
        }
        // ∥A⋆A∥₂² = 15/8.
        assert_eq!(corr.knorm_pow(2), q(15, 8));
        // R⁻_A = (2,1,0,0,1); energy 6.
        let reps = rep_counts_self(&a, RepKind::Difference);
        assert_eq!(reps.counts, vec![2, 1, 0, 0, 1]);
        assert_eq!(energy(&a), 6);
        // Third central moment E(A⋆A − 1)³ = 9/32 = 0.28125.
        let centered = corr.sub_const(&q(1, 1));
        let m3 = centered.map(|v| v.clone().powu(3)).expectation();
        assert_eq!(m3, q(9, 32));
    }

    #[test]
    fn frozen_compression() {
        // (3/2, 1/2) compressed at k=2 → (9/5, 1/5).
        let g = make_group(&[2]).unwrap();
        let f = RealFn::new(&g, vec![q(3, 2), q(1, 2)]).unwrap();
        let c = f.compress(2).unwrap();
        assert_eq!(c.values(), &[q(9, 5), q(1, 5)][..]);
    }

    #[test]
    fn frozen_kdivergence() {
        // uniform{0,1,2} vs uniform{0,1,2,3} in Z_4, k=1 → 1/2.
        let g = make_group(&[4]).unwrap();
        let pi: RealFn<BigRational> = uniform_distribution(&set(&g, &[0, 1, 2])).unwrap();
        let pip: RealFn<BigRational> = uniform_distribution(&GroupSet::full(&g)).unwrap();
        let (pow, root) = kdivergence(&pi, &pip, 1).unwrap();
        assert_eq!(pow, q(1, 2));
        assert!((root - 0.5).abs() < 1e-12);
    }

    #[test]
    fn divergence_detects_missing_support() {
        // If π′ is flat on S and π misses a τ-fraction of S, the divergence
        // is at least τ^{1/k}.
        let g = make_group(&[8]).unwrap();
        let s = set(&g, &[0, 1, 2, 3, 4, 5, 6, 7]);
        let pip: RealFn<f64> = uniform_distribution(&s).unwrap();
        let pi: RealFn<f64> = uniform_distribution(&set(&g, &[0, 1, 2, 3])).unwrap();
        let tau = 0.5f64;
        for k in 1..=4u32 {
            let (_, root) = kdivergence(&pi, &pip, k).unwrap();
            assert!(root >= tau.powf(1.0 / k as f64) - 1e-12, "k={k} root={root}");
        }
    }

    #[test]
    fn convolution_identities() {
        // ⟨f∗g, h⟩ = ⟨f, g⋆h⟩ and A∗B = density of a+b.
        let g = make_group(&[3, 3]).unwrap();
        let a = set(&g, &[0, 4, 7]);
        let b = set(&g, &[1, 2]);
        let (fa, fb): (RealFn<BigRational>, RealFn<BigRational>) =
            (indicator_density(&a).unwrap(), indicator_density(&b).unwrap());
        let h = RealFn::new(
            &g,
            (0..9).map(|i| q(i as i64 % 4, 3)).collect(),
        )
        .unwrap();
        assert_eq!(fa.convolve(&fb).inner(&h), fa.inner(&fb.crosscorr(&h)));
        // Convolution of densities is a density supported on the sumset.
        let conv = fa.convolve(&fb);
        assert!(conv.is_density());
        let sum = a.sumset(&b);
        for x in g.elements() {
            assert_eq!(*conv.value(x) > q(0, 1), sum.contains(x));
        }
    }

    #[test]
    fn jensen_monotonicity_of_knorms() {
        let g = make_group(&[7]).unwrap();
        let f = RealFn::new(&g, vec![0.3, 1.9, 0.0, 2.4, 0.7, 1.0, 0.7]).unwrap();
        let mut prev = 0.0;
        for k in 1..=8 {
            let cur = f.knorm(k);
            assert!(cur >= prev - 1e-12, "k-norms must be nondecreasing in k");
            prev = cur;
        }
        assert!(f.infnorm().to_f64() >= prev - 1e-12);
    }

    #[test]
    fn counting_vs_density_translation_identity() {
        // Σ_x R⁻_A(x)^k = δ^k |G| ∥A⋆A∥_k^k · |A|^k  (equivalently the
        // normalization bridge both sifting guarantees rely on).
        let g = make_group(&[11]).unwrap();
        let a = set(&g, &[0, 1, 3, 7]);
        let d: RealFn<BigRational> = indicator_density(&a).unwrap();
        let corr = d.crosscorr(&d);
        let delta = q(a.size() as i64, g.order() as i64);
        for k in 1..=3u32 {
            let reps = rep_counts_self(&a, RepKind::Difference);
            let lhs = BigRational::from_bigint_ratio(reps.power_sum(k), 1.into());
            let rhs = delta.clone().powu(k)
                * q(g.order() as i64, 1)
                * corr.knorm_pow(k)
                * q(a.size() as i64, 1).powu(k);
            assert_eq!(lhs, rhs);
        }
    }
}
