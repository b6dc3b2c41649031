//! Discrete Fourier analysis on `G = Z_{N1}×…×Z_{Nr}`.
//!
//! Frequencies live in the same coordinate system as the group. The
//! character at frequency `α` is `e_α(x) = exp(2πi Σ_j α_j x_j / N_j)`, the
//! transform of a real `f` is `f̂(α) = E_y f(y) e_α(y)`, and inversion reads
//! `f(x) = Σ_α f̂(α) e_α(−x)`.
//!
//! The quadratic-time transform below is the reference definition; the
//! axis-by-axis variant must agree with it to 1e−9 and is what the larger
//! drivers call.

use crate::group::GroupSpec;
use crate::harmonic::{RealF, RealFn};
use crate::{ApcError, Result, FLOAT_TOL};
use num_complex::Complex64;
use std::f64::consts::TAU;

#[derive(Debug, Clone)]
pub struct Spectrum {
    group: GroupSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: usize) -> Complex64 {
        self.coeffs[alpha]
    }

    /// `Σ_α |f̂(α)|^{2m}`.
    pub fn power_sum(&self, m: u32) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr().powi(m as i32)).sum()
    }

    /// Largest `|f̂(α)|` over nonzero frequencies.
    pub fn max_nonzero(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(a, _)| *a != 0)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Frequencies with `|f̂(α)| ≥ threshold` (the large spectrum), in flat
    /// order, zero frequency included when it qualifies.
    pub fn large_spectrum(&self, threshold: f64) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() >= threshold)
            .map(|(a, _)| a)
            .collect()
    }

    /// `x ↦ Σ_α f̂(α) e_α(−x)` evaluated by the defining sum.
    pub fn inverse(&self) -> Vec<Complex64> {
        let g = &self.group;
        let n = g.order();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for x in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for alpha in 0..n {
                let c = self.coeffs[alpha];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                acc += c * g.character_value(alpha, g.neg(x));
            }
            out[x] = acc;
        }
        out
    }

    /// Inversion for spectra of real functions; fails if any imaginary part
    /// survives above 1e−8.
    pub fn inverse_real(&self) -> Result<RealF> {
        let vals = self.inverse();
        let max_imag = vals.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if max_imag > 1e-8 {
            return Err(ApcError::Precondition(format!(
                "inverse has imaginary residue {max_imag:.3e}; spectrum is not conjugate-symmetric"
            )));
        }
        RealFn::new(&self.group, vals.into_iter().map(|c| c.re).collect())
    }

    /// Max of `|f̂(−α) − conj f̂(α)|`; zero (to rounding) for spectra of real
    /// functions.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = &self.group;
        let mut worst = 0.0f64;
        for alpha in 0..g.order() {
            let d = (self.coeffs[g.neg(alpha)] - self.coeffs[alpha].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }
}

/// Reference transform, straight from the definition: O(|G|²).
pub fn dft_naive(f: &RealF) -> Spectrum {
    let g = f.group();
    let n = g.order();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for alpha in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..n {
            let v = *f.value(y);
            if v == 0.0 {
                continue;
            }
            acc += v * g.character_value(alpha, y);
        }
        coeffs[alpha] = acc / n as f64;
    }
    Spectrum { group: g.clone(), coeffs }
}

/// Axis-by-axis transform: O(|G|·Σ_j N_j). Same normalization as
/// [`dft_naive`].
pub fn dft_fast(f: &RealF) -> Spectrum {
    let g = f.group();
    let n = g.order();
    let mut data: Vec<Complex64> =
        f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let moduli: Vec<usize> = g.moduli().iter().map(|&m| m as usize).collect();
    for (axis, &nj) in moduli.iter().enumerate() {
        // Precomputed N_j-th roots of unity.
        let roots: Vec<Complex64> = (0..nj)
            .map(|m| Complex64::from_polar(1.0, TAU * m as f64 / nj as f64))
            .collect();
        let stride = g.strides()[axis];
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        // Indices with axis coordinate zero enumerate the transform lines.
        for base in 0..n {
            if (base / stride) % nj != 0 {
                continue;
            }
            for a in 0..nj {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..nj {
                    acc += data[base + x * stride] * roots[(a * x) % nj];
                }
                next[base + a * stride] = acc / nj as f64;
            }
        }
        data = next;
    }
    Spectrum { group: g.clone(), coeffs: data }
}

/// `E f^k` computed entirely on the frequency side: the sum of
/// `Π_j f̂(α_j)` over k-tuples of frequencies with `α_1+…+α_k = 0`,
/// accumulated by k−1 counting-measure convolutions over the dual group.
pub fn moment_via_spectrum(spec: &Spectrum, k: u32) -> Complex64 {
    assert!(k >= 1);
    let g = &spec.group;
    let n = g.order();
    let mut acc: Vec<Complex64> = spec.coeffs.clone();
    for _ in 1..k {
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for a in 0..n {
            let va = acc[a];
            if va.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..n {
                let vb = spec.coeffs[b];
                if vb.norm_sqr() == 0.0 {
                    continue;
                }
                next[g.add(a, b)] += va * vb;
            }
        }
        acc = next;
    }
    acc[0]
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PositivityReport {
    /// True when every coefficient is real and nonnegative to tolerance.
    pub spectrally_positive: bool,
    pub min_real_part: f64,
    pub max_imag_magnitude: f64,
}

/// A real `f` satisfies `f ⪰ 0` exactly when every Fourier coefficient is
/// real and nonnegative.
pub fn positivity_report(f: &RealF) -> PositivityReport {
    let spec = dft_fast(f);
    let mut min_real = f64::INFINITY;
    let mut max_imag = 0.0f64;
    for c in spec.coeffs() {
        min_real = min_real.min(c.re);
        max_imag = max_imag.max(c.im.abs());
    }
    PositivityReport {
        spectrally_positive: min_real >= -FLOAT_TOL && max_imag <= FLOAT_TOL,
        min_real_part: min_real,
        max_imag_magnitude: max_imag,
    }
}

/// For `f ⪰ 0` builds the real `g` with `ĝ = √f̂` (so `g⋆g = f`), then
/// re-verifies the factorization to 1e−8 in the ∞-norm.
pub fn spectral_sqrt(f: &RealF) -> Result<RealF> {
    let report = positivity_report(f);
    if !report.spectrally_positive {
        return Err(ApcError::Precondition(format!(
            "spectral square root needs f ⪰ 0 (min coefficient {:.3e}, imag {:.3e})",
            report.min_real_part, report.max_imag_magnitude
        )));
    }
    let spec = dft_fast(f);
    let root_coeffs: Vec<Complex64> = spec
        .coeffs()
        .iter()
        .map(|c| Complex64::new(c.re.max(0.0).sqrt(), 0.0))
        .collect();
    let g = Spectrum { group: f.group().clone(), coeffs: root_coeffs }.inverse_real()?;
    let err = g
        .crosscorr(&g)
        .sub(f)
        .infnorm();
    if err > 1e-8 {
        return Err(ApcError::Stage {
            stage: "spectral_sqrt".into(),
            detail: format!("g⋆g differs from f by {err:.3e} in ∞-norm"),
        });
    }
    Ok(g)
}
