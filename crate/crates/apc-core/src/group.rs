//! Finite abelian groups `G = Z_{N1} × … × Z_{Nr}` with a fixed element
//! encoding, plus characters.
//!
//! Elements are addressed by flat index in row-major mixed radix: the first
//! coordinate is most significant, so flat-index order coincides with
//! lexicographic order on coordinate vectors. Every "choose any" step in the
//! crate breaks ties by this order.

use crate::error::ApcError;
use crate::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A finite abelian group given by its cyclic factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    moduli: Vec<u32>,
    strides: Vec<usize>,
    order: usize,
}

/// An element presented by coordinates; the exchange format for files and
/// reports. Internally most code uses flat indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<u32>,
}

pub fn make_group(moduli: &[u32]) -> Result<GroupSpec> {
    if moduli.is_empty() {
        return Err(ApcError::Precondition("group needs at least one factor".into()));
    }
    if moduli.iter().any(|&n| n == 0) {
        return Err(ApcError::Precondition("zero modulus".into()));
    }
    let mut order: usize = 1;
    for &n in moduli {
        order = order
            .checked_mul(n as usize)
            .ok_or_else(|| ApcError::Budget("group order overflows usize".into()))?;
    }
    let mut strides = vec![1usize; moduli.len()];
    for i in (0..moduli.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * moduli[i + 1] as usize;
    }
    Ok(GroupSpec { moduli: moduli.to_vec(), strides, order })
}

impl GroupSpec {
    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Row-major strides: flat index = Σ coords[i]·strides[i].
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// `Some((p, n))` when the group is `Z_p^n` for a prime `p`.
    pub fn is_prime_vector_space(&self) -> Option<(u32, usize)> {
        let p = self.moduli[0];
        if !is_prime(p) || self.moduli.iter().any(|&m| m != p) {
            return None;
        }
        Some((p, self.rank()))
    }

    pub fn coords_of(&self, mut idx: usize) -> Vec<u32> {
        debug_assert!(idx < self.order);
        let mut coords = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            coords.push((idx / self.strides[i]) as u32);
            idx %= self.strides[i];
        }
        coords
    }

    /// Flat index of in-range coordinates.
    pub fn index_of(&self, coords: &[u32]) -> usize {
        debug_assert_eq!(coords.len(), self.rank());
        let mut idx = 0usize;
        for i in 0..self.rank() {
            debug_assert!(coords[i] < self.moduli[i]);
            idx += coords[i] as usize * self.strides[i];
        }
        idx
    }

    /// Flat index of arbitrary integer coordinates, reduced per modulus.
    pub fn index_of_reduced(&self, coords: &[i64]) -> usize {
        let mut idx = 0usize;
        for i in 0..self.rank() {
            let n = self.moduli[i] as i64;
            let c = coords[i].rem_euclid(n);
            idx += c as usize * self.strides[i];
        }
        idx
    }

    pub fn element(&self, idx: usize) -> GroupElement {
        GroupElement { coords: self.coords_of(idx) }
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn zero(&self) -> usize {
        0
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords_of(a), self.coords_of(b));
        let mut out = 0usize;
        for i in 0..self.rank() {
            let n = self.moduli[i];
            let mut s = ca[i] + cb[i];
            if s >= n {
                s -= n;
            }
            out += s as usize * self.strides[i];
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        let ca = self.coords_of(a);
        let mut out = 0usize;
        for i in 0..self.rank() {
            let n = self.moduli[i];
            let s = if ca[i] == 0 { 0 } else { n - ca[i] };
            out += s as usize * self.strides[i];
        }
        out
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Scalar multiple `c·x` (c may be negative).
    pub fn scale(&self, c: i64, x: usize) -> usize {
        let cx = self.coords_of(x);
        let mut out = 0usize;
        for i in 0..self.rank() {
            let n = self.moduli[i] as i64;
            let s = (c * cx[i] as i64).rem_euclid(n) as usize;
            out += s * self.strides[i];
        }
        out
    }

    pub fn double(&self, x: usize) -> usize {
        self.scale(2, x)
    }

    /// True when every cyclic factor has odd order, i.e. doubling is a
    /// bijection and 2 is invertible.
    pub fn two_invertible(&self) -> bool {
        self.moduli.iter().all(|&n| n % 2 == 1)
    }

    /// `y` with `2y = x`; requires all moduli odd.
    pub fn halve(&self, x: usize) -> Result<usize> {
        if !self.two_invertible() {
            return Err(ApcError::Precondition("halving needs all moduli odd".into()));
        }
        let cx = self.coords_of(x);
        let mut out = 0usize;
        for i in 0..self.rank() {
            let n = self.moduli[i] as i64;
            let inv2 = inv_mod(2, n).expect("odd modulus");
            let s = (inv2 * cx[i] as i64).rem_euclid(n) as usize;
            out += s as usize * self.strides[i];
        }
        Ok(out)
    }

    /// The fractional phase `Σ_j α_j x_j / N_j mod 1` of the pairing.
    pub fn phase(&self, alpha: usize, x: usize) -> f64 {
        let (ca, cx) = (self.coords_of(alpha), self.coords_of(x));
        let mut t = 0.0f64;
        for i in 0..self.rank() {
            let n = self.moduli[i] as u64;
            let prod = (ca[i] as u64 * cx[i] as u64) % n;
            t += prod as f64 / n as f64;
        }
        t.fract()
    }

    /// Character value `e_α(x) = exp(2πi Σ α_j x_j / N_j)`.
    pub fn character_value(&self, alpha: usize, x: usize) -> Complex64 {
        let theta = TAU * self.phase(alpha, x);
        Complex64::new(theta.cos(), theta.sin())
    }

    /// Chord distance `|e_α(x) − 1| = 2|sin(π·phase)|`.
    pub fn chord(&self, alpha: usize, x: usize) -> f64 {
        2.0 * (std::f64::consts::PI * self.phase(alpha, x)).sin().abs()
    }
}

impl GroupSpec {
    /// Table `x ↦ x + t` over all flat indices, built incrementally in
    /// odometer order (no per-element coordinate decoding).
    pub fn translate_table(&self, t: usize) -> Vec<usize> {
        let r = self.rank();
        let tc = self.coords_of(t);
        let mut coords = vec![0u32; r];
        let mut table = Vec::with_capacity(self.order);
        for _ in 0..self.order {
            let mut idx = 0usize;
            for i in 0..r {
                let n = self.moduli[i];
                let mut s = coords[i] + tc[i];
                if s >= n {
                    s -= n;
                }
                idx += s as usize * self.strides[i];
            }
            table.push(idx);
            let mut k = r;
            while k > 0 {
                coords[k - 1] += 1;
                if coords[k - 1] < self.moduli[k - 1] {
                    break;
                }
                coords[k - 1] = 0;
                k -= 1;
            }
        }
        table
    }

    /// Table `x ↦ −x`.
    pub fn negation_table(&self) -> Vec<usize> {
        (0..self.order).map(|x| self.neg(x)).collect()
    }
}

/// A subset of a group, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSet {
    group: GroupSpec,
    members: Vec<usize>,
}

impl GroupSet {
    pub fn new(group: &GroupSpec, members: &[usize]) -> Result<Self> {
        let mut m = members.to_vec();
        m.sort_unstable();
        if m.windows(2).any(|w| w[0] == w[1]) {
            return Err(ApcError::Precondition("duplicate element in set".into()));
        }
        if let Some(&last) = m.last() {
            if last >= group.order() {
                return Err(ApcError::Precondition("element out of range".into()));
            }
        }
        Ok(GroupSet { group: group.clone(), members: m })
    }

    pub fn full(group: &GroupSpec) -> Self {
        GroupSet { group: group.clone(), members: (0..group.order()).collect() }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// Density |A|/|G|.
    pub fn density(&self) -> f64 {
        self.size() as f64 / self.group.order() as f64
    }

    /// `−lg(|A|/|G|)`.
    pub fn log_codensity(&self) -> f64 {
        -(self.density().log2())
    }

    pub fn indicator(&self) -> Vec<bool> {
        let mut v = vec![false; self.group.order()];
        for &m in &self.members {
            v[m] = true;
        }
        v
    }

    pub fn translate(&self, t: usize) -> Self {
        let members: Vec<usize> = self.members.iter().map(|&m| self.group.add(m, t)).collect();
        GroupSet::new(&self.group, &members).expect("translate preserves distinctness")
    }

    pub fn reflect(&self) -> Self {
        let members: Vec<usize> = self.members.iter().map(|&m| self.group.neg(m)).collect();
        GroupSet::new(&self.group, &members).expect("reflection preserves distinctness")
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let members: Vec<usize> = self
            .members
            .iter()
            .copied()
            .filter(|&m| other.contains(m))
            .collect();
        GroupSet { group: self.group.clone(), members }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut members = self.members.clone();
        members.extend(other.members.iter().copied().filter(|&m| !self.contains(m)));
        members.sort_unstable();
        GroupSet { group: self.group.clone(), members }
    }

    /// Sumset `A + B`.
    pub fn sumset(&self, other: &Self) -> Self {
        let mut seen = vec![false; self.group.order()];
        for &a in &self.members {
            for &b in other.members() {
                seen[self.group.add(a, b)] = true;
            }
        }
        let members: Vec<usize> = (0..self.group.order()).filter(|&x| seen[x]).collect();
        GroupSet { group: self.group.clone(), members }
    }

    /// Difference set `A − B`.
    pub fn difference_set(&self, other: &Self) -> Self {
        self.sumset(&other.reflect())
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Modular inverse via extended Euclid; `None` when `gcd(a, n) ≠ 1`.
pub fn inv_mod(a: i64, n: i64) -> Option<i64> {
    let (mut r0, mut r1) = (n, a.rem_euclid(n));
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        None
    } else {
        Some(t0.rem_euclid(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn sample_groups() -> Vec<GroupSpec> {
        [
            vec![5u32],
            vec![4],
            vec![6],
            vec![12],
            vec![2, 2],
            vec![3, 3],
            vec![2, 3, 4],
            vec![2, 2, 2, 2],
        ]
        .iter()
        .map(|m| make_group(m).unwrap())
        .collect()
    }

    #[test]
    fn index_coords_roundtrip_and_lex_order() {
        let g = make_group(&[2, 3, 4]).unwrap();
        assert_eq!(g.order(), 24);
        let mut prev: Option<Vec<u32>> = None;
        for idx in g.elements() {
            let c = g.coords_of(idx);
            assert_eq!(g.index_of(&c), idx);
            if let Some(p) = prev {
                assert!(p < c, "flat order must be lexicographic");
            }
            prev = Some(c);
        }
    }

    #[test]
    fn pinned_character_values() {
        // Z_4: e_1(1) = i.
        let z4 = make_group(&[4]).unwrap();
        let v = z4.character_value(1, 1);
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        // Z_6: e_2(3) = exp(2πi·6/6) = 1.
        let z6 = make_group(&[6]).unwrap();
        let v = z6.character_value(2, 3);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn character_orthogonality_small_groups() {
        // ⟨e_α, e_β⟩ = E_x conj(e_α(x)) e_β(x) = 1{α=β}, within 1e−12.
        for g in sample_groups() {
            for alpha in g.elements() {
                for beta in g.elements() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in g.elements() {
                        acc += g.character_value(alpha, x).conj() * g.character_value(beta, x);
                    }
                    acc /= g.order() as f64;
                    let expect = if alpha == beta { 1.0 } else { 0.0 };
                    assert!(
                        (acc - Complex64::new(expect, 0.0)).norm() < 1e-12,
                        "α={alpha} β={beta} got {acc}"
                    );
                }
            }
        }
    }

    #[test]
    fn character_symmetry() {
        for g in sample_groups() {
            for a in g.elements() {
                for x in g.elements() {
                    let lhs = g.character_value(a, x);
                    let rhs = g.character_value(x, a);
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn doubling_permutes_odd_order_groups() {
        let g = make_group(&[3, 5]).unwrap();
        let mut seen = vec![false; g.order()];
        for x in g.elements() {
            let y = g.double(x);
            assert!(!seen[y]);
            seen[y] = true;
            assert_eq!(g.halve(y).unwrap(), x);
        }
        assert!(seen.iter().all(|&b| b));
        // And Z_4 is not halvable.
        assert!(make_group(&[4]).unwrap().halve(2).is_err());
    }

    proptest! {
        #[test]
        fn group_laws(mods in proptest::collection::vec(1u32..7, 1..4), seed in 0usize..1000) {
            let g = make_group(&mods).unwrap();
            let a = seed % g.order();
            let b = (seed / 7) % g.order();
            let c = (seed / 49) % g.order();
            prop_assert_eq!(g.add(a, b), g.add(b, a));
            prop_assert_eq!(g.add(g.add(a, b), c), g.add(a, g.add(b, c)));
            prop_assert_eq!(g.add(a, g.neg(a)), 0);
            prop_assert_eq!(g.sub(g.add(a, b), b), a);
            prop_assert_eq!(g.scale(3, a), g.add(a, g.add(a, a)));
        }
    }
}
