//! Desk-scale laboratory for additive structure in finite abelian groups.
//!
//! The crate is organized around a handful of layers:
//!
//! * [`group`] / [`subspace`] — finite abelian groups `Z_{N1} × … × Z_{Nr}`,
//!   characters, and (for prime moduli) affine-subspace linear algebra.
//! * [`harmonic`] — density functions, convolutions, norms, Fourier
//!   transforms, representation counts, and a battery of checkable
//!   inequality "laws".
//! * [`sifting`] — translate-intersection searches with a-posteriori
//!   certificates, plus the weighted pigeonhole utility.
//! * [`spread`] — spreadness/regularity norms, greedy density increments,
//!   approximate-invariance pipelines, and the certified increment drivers.
//! * [`bohr`] / [`freiman`] — Bohr sets, dilations, regularity, progressions,
//!   smoothing identities, Freiman homomorphisms, and safe product sets.
//! * [`threeap`] — 3-progression counting, progression-free baselines, and
//!   the integer-case density-increment pipeline.
//! * [`io`] / [`report`] / [`seeding`] / [`suites`] — file formats, experiment
//!   reports, deterministic randomness, and the verification suites.
//!
//! Everything that certifies an inequality does so numerically: drivers
//! re-check every claimed bound on the concrete instance and fail loudly with
//! a stage id otherwise. Exact rational arithmetic is available for all
//! density/counting quantities on groups of order ≤ 4096.

pub mod error;
pub mod scalar;
pub mod group;
pub mod subspace;
pub mod harmonic;
pub mod sifting;
pub mod spread;
pub mod bohr;
pub mod freiman;
pub mod threeap;
pub mod io;
pub mod seeding;
pub mod report;
pub mod suites;

pub use error::ApcError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, ApcError>;

/// Default additive tolerance for float-mode inequality margins.
pub const FLOAT_TOL: f64 = 1e-9;

/// Largest group order for which the exact rational backend is supported.
pub const EXACT_ORDER_CAP: usize = 4096;
