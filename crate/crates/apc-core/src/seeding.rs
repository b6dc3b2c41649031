//! Deterministic randomness.
//!
//! Every run owns a single root seed; each pipeline stage derives its own
//! independent stream by hashing `(root seed, stage id)`. Adding or removing
//! a stage therefore never perturbs the draws seen by the others, which is
//! what makes reports reproducible across code changes.

use crate::group::{GroupSet, GroupSpec};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

/// Stream for one named stage of a run.
pub fn stage_rng(root_seed: u64, stage_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(root_seed.to_le_bytes());
    h.update([0x1f]);
    h.update(stage_id.as_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

pub trait RngExt {
    /// Uniform in `[0,1)` with 53 bits of precision.
    fn unit_f64(&mut self) -> f64;
    /// Uniform in `{0,…,n−1}` by rejection (no modulo bias).
    fn below(&mut self, n: usize) -> usize;
    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T;
    fn shuffle<T>(&mut self, items: &mut [T]);
}

impl<R: RngCore> RngExt for R {
    fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n64 = n as u64;
        let zone = u64::MAX - u64::MAX % n64;
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n64) as usize;
            }
        }
    }

    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Each element kept independently with probability `p`.
pub fn random_subset(rng: &mut impl RngCore, group: &GroupSpec, p: f64) -> GroupSet {
    let members: Vec<usize> =
        group.elements().filter(|_| rng.unit_f64() < p).collect();
    GroupSet::new(group, &members).expect("elements() yields valid distinct indices")
}

/// Like [`random_subset`] but guaranteed nonempty (a uniform element is
/// added when the coin flips all come up tails).
pub fn random_nonempty_subset(rng: &mut impl RngCore, group: &GroupSpec, p: f64) -> GroupSet {
    let s = random_subset(rng, group, p);
    if !s.is_empty() {
        return s;
    }
    let x = rng.below(group.order());
    GroupSet::new(group, &[x]).unwrap()
}

/// Uniformly random subset of exactly `m` elements.
pub fn random_subset_of_size(rng: &mut impl RngCore, group: &GroupSpec, m: usize) -> GroupSet {
    assert!(m <= group.order());
    let mut pool: Vec<usize> = group.elements().collect();
    rng.shuffle(&mut pool);
    pool.truncate(m);
    GroupSet::new(group, &pool).unwrap()
}
