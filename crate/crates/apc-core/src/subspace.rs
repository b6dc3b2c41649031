//! Affine subspaces of `F_p^n` (prime `p`) and the small amount of linear
//! algebra they need: reduced row echelon forms, kernels, spans, and a
//! deterministic enumeration of all affine subspaces up to a given
//! codimension.
//!
//! Subspaces are kept in canonical form — basis rows in RREF with ascending
//! pivot columns, shift reduced to zero on the pivot columns — so equal
//! subspaces compare equal structurally and enumerations need no dedup pass.

use crate::error::ApcError;
use crate::group::GroupSpec;
use crate::Result;

pub type FpVec = Vec<u32>;

fn inv_modp(a: u32, p: u32) -> u32 {
    crate::group::inv_mod(a as i64, p as i64).expect("nonzero element of prime field") as u32
}

/// In-place reduced row echelon form over `F_p`. Returns the pivot columns;
/// zero rows are removed.
pub fn fp_rref(rows: &mut Vec<FpVec>, p: u32) -> Vec<usize> {
    let n = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(sel) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, sel);
        let inv = inv_modp(rows[rank][col], p);
        for x in rows[rank].iter_mut() {
            *x = (*x * inv) % p;
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != 0 {
                let factor = rows[i][col];
                for j in 0..n {
                    let sub = (factor * rows[rank][j]) % p;
                    rows[i][j] = (rows[i][j] + p - sub) % p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    pivots
}

/// Basis of `ker M` for an RREF matrix with the given pivot columns; the
/// result is itself RREF-canonical after a final reduction.
pub fn fp_kernel(rref: &[FpVec], pivots: &[usize], n: usize, p: u32) -> Vec<FpVec> {
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![0u32; n];
        v[f] = 1;
        for (i, &pc) in pivots.iter().enumerate() {
            // (Mv)_i = M[i][f] + v[pc] must vanish.
            v[pc] = (p - rref[i][f] % p) % p;
        }
        basis.push(v);
    }
    fp_rref(&mut basis, p);
    basis
}

/// An affine subspace `V + θ` of `F_p^n`, stored canonically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineSubspace {
    group: GroupSpec,
    p: u32,
    basis: Vec<FpVec>,
    pivots: Vec<usize>,
    shift: FpVec,
}

impl AffineSubspace {
    pub fn new(group: &GroupSpec, basis: Vec<FpVec>, shift: FpVec) -> Result<Self> {
        let (p, n) = group
            .is_prime_vector_space()
            .ok_or_else(|| ApcError::Precondition("affine subspaces need Z_p^n, p prime".into()))?;
        if shift.len() != n || basis.iter().any(|r| r.len() != n) {
            return Err(ApcError::Precondition("vector length must equal the rank".into()));
        }
        let given = basis.len();
        let mut rows: Vec<FpVec> = basis
            .into_iter()
            .map(|r| r.iter().map(|&x| x % p).collect())
            .collect();
        let pivots = fp_rref(&mut rows, p);
        if rows.len() != given {
            return Err(ApcError::Precondition("basis is linearly dependent".into()));
        }
        let mut theta: FpVec = shift.iter().map(|&x| x % p).collect();
        // Canonical coset representative: zero out the pivot coordinates.
        for (i, &pc) in pivots.iter().enumerate() {
            let factor = theta[pc];
            if factor != 0 {
                for j in 0..n {
                    let sub = (factor * rows[i][j]) % p;
                    theta[j] = (theta[j] + p - sub) % p;
                }
            }
        }
        Ok(AffineSubspace { group: group.clone(), p, basis: rows, pivots, shift: theta })
    }

    pub fn linear(group: &GroupSpec, basis: Vec<FpVec>) -> Result<Self> {
        let n = group.rank();
        Self::new(group, basis, vec![0; n])
    }

    /// The whole group as an affine subspace.
    pub fn whole(group: &GroupSpec) -> Result<Self> {
        let n = group.rank();
        let basis = (0..n)
            .map(|i| {
                let mut v = vec![0u32; n];
                v[i] = 1;
                v
            })
            .collect();
        Self::linear(group, basis)
    }

    pub fn point(group: &GroupSpec, x: usize) -> Result<Self> {
        let coords = group.coords_of(x);
        Self::new(group, Vec::new(), coords)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn basis(&self) -> &[FpVec] {
        &self.basis
    }

    pub fn shift(&self) -> &FpVec {
        &self.shift
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.group.rank() - self.dim()
    }

    pub fn size(&self) -> usize {
        (self.p as usize).pow(self.dim() as u32)
    }

    pub fn is_linear(&self) -> bool {
        self.shift.iter().all(|&x| x == 0)
    }

    pub fn contains(&self, idx: usize) -> bool {
        let coords = self.group.coords_of(idx);
        let n = self.group.rank();
        let mut v: FpVec = (0..n)
            .map(|i| (coords[i] + self.p - self.shift[i]) % self.p)
            .collect();
        for (i, &pc) in self.pivots.iter().enumerate() {
            let factor = v[pc];
            if factor != 0 {
                for j in 0..n {
                    let sub = (factor * self.basis[i][j]) % self.p;
                    v[j] = (v[j] + self.p - sub) % self.p;
                }
            }
        }
        v.iter().all(|&x| x == 0)
    }

    /// All member flat indices, ascending.
    pub fn members(&self) -> Vec<usize> {
        let n = self.group.rank();
        let d = self.dim();
        let mut out = Vec::with_capacity(self.size());
        let mut coeffs = vec![0u32; d];
        loop {
            let mut v = self.shift.clone();
            for (i, &c) in coeffs.iter().enumerate() {
                if c != 0 {
                    for j in 0..n {
                        v[j] = (v[j] + c * self.basis[i][j]) % self.p;
                    }
                }
            }
            out.push(self.group.index_of(&v));
            // Odometer over coefficient vectors.
            let mut k = d;
            loop {
                if k == 0 {
                    break;
                }
                coeffs[k - 1] += 1;
                if coeffs[k - 1] < self.p {
                    break;
                }
                coeffs[k - 1] = 0;
                k -= 1;
            }
            if k == 0 {
                break;
            }
        }
        out.sort_unstable();
        out
    }

    /// Coordinates of a member in the basis, i.e. the `c` with
    /// `x = θ + Σ c_i b_i`. Errors when `x` is not a member.
    pub fn coords_in_basis(&self, idx: usize) -> Result<FpVec> {
        if !self.contains(idx) {
            return Err(ApcError::Precondition("not a member of the subspace".into()));
        }
        let coords = self.group.coords_of(idx);
        let n = self.group.rank();
        let v: FpVec = (0..n)
            .map(|i| (coords[i] + self.p - self.shift[i]) % self.p)
            .collect();
        // RREF basis: the coefficient of row i is the entry at its pivot.
        Ok(self.pivots.iter().map(|&pc| v[pc]).collect())
    }

    /// The translate `V + θ + t`.
    pub fn translate(&self, t: usize) -> Self {
        let tc = self.group.coords_of(t);
        let shift: FpVec = self
            .shift
            .iter()
            .zip(&tc)
            .map(|(&a, &b)| (a + b) % self.p)
            .collect();
        Self::new(&self.group, self.basis.clone(), shift).expect("translate preserves validity")
    }

    /// The reflection `−(V+θ) = V − θ`.
    pub fn reflect(&self) -> Self {
        let shift: FpVec = self.shift.iter().map(|&a| (self.p - a % self.p) % self.p).collect();
        Self::new(&self.group, self.basis.clone(), shift).expect("reflection preserves validity")
    }

    /// The underlying linear subspace `V`.
    pub fn direction(&self) -> Self {
        Self::new(&self.group, self.basis.clone(), vec![0; self.group.rank()])
            .expect("direction preserves validity")
    }
}

/// Affine span `Span*(S)`: the smallest affine subspace containing the set.
pub fn span_affine(group: &GroupSpec, points: &[usize]) -> Result<AffineSubspace> {
    if points.is_empty() {
        return Err(ApcError::Precondition("affine span of an empty set".into()));
    }
    let (p, n) = group
        .is_prime_vector_space()
        .ok_or_else(|| ApcError::Precondition("affine span needs Z_p^n, p prime".into()))?;
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let base = group.coords_of(sorted[0]);
    let mut rows: Vec<FpVec> = sorted[1..]
        .iter()
        .map(|&q| {
            let c = group.coords_of(q);
            (0..n).map(|i| (c[i] + p - base[i]) % p).collect()
        })
        .collect();
    fp_rref(&mut rows, p);
    AffineSubspace::new(group, rows, base)
}

/// All full-rank `c×n` RREF matrices over `F_p`, as `(rows, pivot columns)`,
/// in a fixed order: pivot-column sets lexicographically, then free entries
/// by odometer. Each `c`-dimensional row space appears exactly once.
pub fn enumerate_rref_matrices(n: usize, c: usize, p: u32) -> Vec<(Vec<FpVec>, Vec<usize>)> {
    assert!(c >= 1 && c <= n);
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = (0..c).collect();
    loop {
        // Free slots: (row i, col j) with j > pivots[i], j not a pivot column.
        let mut slots = Vec::new();
        for i in 0..c {
            for j in (pivots[i] + 1)..n {
                if !pivots.contains(&j) {
                    slots.push((i, j));
                }
            }
        }
        let mut vals = vec![0u32; slots.len()];
        loop {
            let mut rows = vec![vec![0u32; n]; c];
            for i in 0..c {
                rows[i][pivots[i]] = 1;
            }
            for (s, &(i, j)) in slots.iter().enumerate() {
                rows[i][j] = vals[s];
            }
            out.push((rows, pivots.clone()));
            // Odometer over free values, last slot fastest.
            let mut k = slots.len();
            loop {
                if k == 0 {
                    break;
                }
                vals[k - 1] += 1;
                if vals[k - 1] < p {
                    break;
                }
                vals[k - 1] = 0;
                k -= 1;
            }
            if k == 0 {
                break;
            }
        }
        // Next pivot-column combination in lexicographic order.
        let mut i = c;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < n - (c - i) {
                pivots[i] += 1;
                for j in (i + 1)..c {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
    }
}

/// Every affine subspace of codimension ≤ `max_codim`, deterministically
/// ordered by (codimension, dual matrix, coset). Each subspace arises as a
/// coset of the kernel of a surjective linear map `F_p^n → F_p^c`, and the
/// RREF canonicalization of those maps makes the enumeration duplicate-free
/// by construction.
pub fn enumerate_affine_subspaces(
    group: &GroupSpec,
    max_codim: usize,
) -> Result<Vec<AffineSubspace>> {
    let (p, n) = group
        .is_prime_vector_space()
        .ok_or_else(|| ApcError::Precondition("subspace enumeration needs Z_p^n, p prime".into()))?;
    let mut out = vec![AffineSubspace::whole(group)?];
    for c in 1..=max_codim.min(n) {
        for (rref, pivots) in enumerate_rref_matrices(n, c, p) {
            let kernel = fp_kernel(&rref, &pivots, n, p);
            let mut t = vec![0u32; c];
            loop {
                let mut shift = vec![0u32; n];
                for (i, &pc) in pivots.iter().enumerate() {
                    shift[pc] = t[i];
                }
                out.push(AffineSubspace::new(group, kernel.clone(), shift)?);
                let mut k = c;
                loop {
                    if k == 0 {
                        break;
                    }
                    t[k - 1] += 1;
                    if t[k - 1] < p {
                        break;
                    }
                    t[k - 1] = 0;
                    k -= 1;
                }
                if k == 0 {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// The annihilator `W^⊥ = {x : Σ_j w_j x_j = 0 for all w ∈ W}` of a set of
/// frequency vectors, as a linear subspace.
pub fn annihilator(group: &GroupSpec, freqs: &[usize]) -> Result<AffineSubspace> {
    let (p, n) = group
        .is_prime_vector_space()
        .ok_or_else(|| ApcError::Precondition("annihilator needs Z_p^n, p prime".into()))?;
    let mut rows: Vec<FpVec> = freqs.iter().map(|&f| group.coords_of(f)).collect();
    let pivots = fp_rref(&mut rows, p);
    let kernel = fp_kernel(&rows, &pivots, n, p);
    AffineSubspace::linear(group, kernel)
}

/// Rank of a set of frequency vectors over `F_p`.
pub fn fp_rank(group: &GroupSpec, vecs: &[usize]) -> Result<usize> {
    let (p, _) = group
        .is_prime_vector_space()
        .ok_or_else(|| ApcError::Precondition("rank needs Z_p^n, p prime".into()))?;
    let mut rows: Vec<FpVec> = vecs.iter().map(|&f| group.coords_of(f)).collect();
    Ok(fp_rref(&mut rows, p).len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    #[test]
    fn enumeration_counts_pinned() {
        // F_2^2, codim ≤ 1: the whole plane + 3 lines through 0 × 2 cosets = 7.
        let g = make_group(&[2, 2]).unwrap();
        let subs = enumerate_affine_subspaces(&g, 1).unwrap();
        assert_eq!(subs.len(), 7);
        // F_2^1: the line, {0}, {1}.
        let g1 = make_group(&[2]).unwrap();
        let subs1 = enumerate_affine_subspaces(&g1, 1).unwrap();
        assert_eq!(subs1.len(), 3);
    }

    #[test]
    fn member_counts_are_powers() {
        let g = make_group(&[3, 3]).unwrap();
        for s in enumerate_affine_subspaces(&g, 2).unwrap() {
            assert_eq!(s.members().len(), 3usize.pow((2 - s.codim()) as u32));
            for &m in &s.members() {
                assert!(s.contains(m));
            }
        }
    }

    #[test]
    fn enumeration_is_duplicate_free_and_deterministic() {
        let g = make_group(&[2, 2, 2]).unwrap();
        let subs = enumerate_affine_subspaces(&g, 2).unwrap();
        let mut member_sets: Vec<Vec<usize>> = subs.iter().map(|s| s.members()).collect();
        let total = member_sets.len();
        member_sets.sort();
        member_sets.dedup();
        assert_eq!(member_sets.len(), total, "no two subspaces share a member set");
        let again = enumerate_affine_subspaces(&g, 2).unwrap();
        assert_eq!(subs, again);
    }

    #[test]
    fn span_of_two_points_is_a_line() {
        let g = make_group(&[3, 3]).unwrap();
        let a = g.index_of(&[1, 0]);
        let b = g.index_of(&[2, 2]);
        let s = span_affine(&g, &[a, b]).unwrap();
        assert_eq!(s.dim(), 1);
        let members = s.members();
        assert_eq!(members.len(), 3);
        assert!(members.contains(&a) && members.contains(&b));
        // The affine span of a single point is that point.
        let pt = span_affine(&g, &[b]).unwrap();
        assert_eq!(pt.members(), vec![b]);
    }

    #[test]
    fn contains_matches_membership_list() {
        let g = make_group(&[5]).unwrap();
        for s in enumerate_affine_subspaces(&g, 1).unwrap() {
            let members = s.members();
            for x in g.elements() {
                assert_eq!(s.contains(x), members.contains(&x));
            }
        }
    }

    #[test]
    fn coords_in_basis_roundtrip() {
        let g = make_group(&[3, 3, 3]).unwrap();
        let v = AffineSubspace::new(
            &g,
            vec![vec![1, 0, 2], vec![0, 1, 1]],
            vec![0, 0, 1],
        )
        .unwrap();
        for &m in &v.members() {
            let c = v.coords_in_basis(m).unwrap();
            // Rebuild θ + Σ c_i b_i and compare.
            let n = g.rank();
            let mut w = v.shift().to_vec();
            for (i, &ci) in c.iter().enumerate() {
                for j in 0..n {
                    w[j] = (w[j] + ci * v.basis()[i][j]) % 3;
                }
            }
            assert_eq!(g.index_of(&w), m);
        }
    }

    #[test]
    fn annihilator_of_frequency() {
        let g = make_group(&[2, 2]).unwrap();
        let alpha = g.index_of(&[1, 1]);
        let v = annihilator(&g, &[alpha]).unwrap();
        assert_eq!(v.dim(), 1);
        assert!(v.contains(g.index_of(&[0, 0])));
        assert!(v.contains(g.index_of(&[1, 1])));
        assert!(!v.contains(g.index_of(&[1, 0])));
    }
}
