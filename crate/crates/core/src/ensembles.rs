//! Gaussian ensembles of random polynomials `f(z) = Σ c_i z^i`.
//!
//! An ensemble is fixed by its two-point function: the coefficients are
//! independent circular complex Gaussians with `E[c_i c̄_j] = δ_ij σ_i²`, so
//! the kernel is `G(z₁, z̄₂) = Σ σ_i² (z₁ z̄₂)^i`. Two variance profiles are
//! provided:
//!
//! * Kac: `σ_i² = 1`, kernel `(1 − w^{N+1}) / (1 − w)` with `w = z₁ z̄₂`;
//! * Kostlan: `σ_i² = C(N, i)`, kernel `(1 + w)^N`.
//!
//! The Kac ensemble is the Gaussian measure induced by the inner product
//! `∮ f̄ g dz / 2πiz` on the unit circle, which is why its zeros crowd onto
//! `|z| = 1`; the Kostlan ensemble is SU(2) invariant.

use alloc::vec::Vec;
use num_traits::Float;

use crate::rng::{self, domain};
use crate::{Error, Result, C64};

/// Below this distance from `w = 1` the Kac kernel is summed term by term.
pub const KAC_SERIES_THRESHOLD: f64 = 1e-8;

/// Largest degree whose Kostlan variances are representable as `f64`.
///
/// Binomials are computed exactly in `u128` while the running products fit
/// (through degree 125 or so); above that they come from `lgamma` in log
/// space, which stays finite up to here.
pub const KOSTLAN_MAX_DEGREE: usize = 1029;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Kac,
    Kostlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    kind: EnsembleKind,
    degree: usize,
    variances: Vec<f64>,
}

/// Kernel value with its first mixed derivatives.
///
/// `d1 = ∂_{z₁} G`, `d2bar = ∂_{z̄₂} G`, `d1d2bar = ∂_{z₁} ∂_{z̄₂} G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: C64,
    pub d1: C64,
    pub d2bar: C64,
    pub d1d2bar: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSection {
    pub coefficients: Vec<C64>,
}

fn binomial_row_exact(n: usize) -> Option<Vec<u128>> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c: u128 = 1;
    row.push(c);
    for k in 0..n {
        // C(n, k+1) = C(n, k) (n - k) / (k + 1); the division is exact.
        c = c.checked_mul((n - k) as u128)? / (k as u128 + 1);
        row.push(c);
    }
    Some(row)
}

fn binomial_row_log(n: usize) -> Vec<f64> {
    let lg = |x: f64| libm::lgamma(x);
    let top = lg(n as f64 + 1.0);
    (0..=n)
        .map(|k| Float::exp(top - lg(k as f64 + 1.0) - lg((n - k) as f64 + 1.0)).round())
        .collect()
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidDegree(degree));
        }
        let variances = match kind {
            EnsembleKind::Kac => alloc::vec![1.0; degree + 1],
            EnsembleKind::Kostlan => match binomial_row_exact(degree) {
                Some(row) => row.into_iter().map(|c| c as f64).collect(),
                None => binomial_row_log(degree),
            },
        };
        if variances.iter().any(|v| !v.is_finite()) {
            return Err(Error::VarianceOverflow(degree));
        }
        Ok(Self {
            kind,
            degree,
            variances,
        })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// `G(z₁, z̄₂)` from the closed form of the ensemble.
    pub fn kernel_value(&self, z1: C64, z2bar: C64) -> Result<C64> {
        check_finite(&[z1, z2bar])?;
        let w = z1 * z2bar;
        let n = self.degree;
        Ok(match self.kind {
            EnsembleKind::Kac => {
                let one = C64::new(1.0, 0.0);
                if (one - w).norm() < KAC_SERIES_THRESHOLD {
                    self.kernel_direct(z1, z2bar)
                } else {
                    (one - w.powi(n as i32 + 1)) / (one - w)
                }
            }
            EnsembleKind::Kostlan => (1.0 + w).powi(n as i32),
        })
    }

    /// `Σ σ_i² (z₁ z̄₂)^i` summed term by term.
    pub fn kernel_direct(&self, z1: C64, z2bar: C64) -> C64 {
        let w = z1 * z2bar;
        self.variances
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &v| acc * w + v)
    }

    pub fn kernel(&self, z1: C64, z2bar: C64) -> Result<KernelEval> {
        let value = self.kernel_value(z1, z2bar)?;
        let w = z1 * z2bar;
        // G = φ(w): ∂_{z₁} G = φ'(w) z̄₂, ∂_{z̄₂} G = φ'(w) z₁, mixed = φ'' w + φ'.
        let (d, dd) = match self.kind {
            EnsembleKind::Kostlan => {
                let n = self.degree as f64;
                let base = 1.0 + w;
                let d = base.powi(self.degree as i32 - 1) * n;
                let dd = if self.degree >= 2 {
                    base.powi(self.degree as i32 - 2) * (n * (n - 1.0))
                } else {
                    C64::new(0.0, 0.0)
                };
                (d, dd)
            }
            EnsembleKind::Kac => {
                let mut d = C64::new(0.0, 0.0);
                let mut dd = C64::new(0.0, 0.0);
                for i in (1..=self.degree).rev() {
                    let fi = i as f64;
                    d = d * w + fi * self.variances[i];
                }
                for i in (2..=self.degree).rev() {
                    let fi = i as f64;
                    dd = dd * w + fi * (fi - 1.0) * self.variances[i];
                }
                (d, dd)
            }
        };
        Ok(KernelEval {
            value,
            d1: d * z2bar,
            d2bar: d * z1,
            d1d2bar: dd * w + d,
        })
    }

    /// Two-point function conditioned on `f(z) = 0`:
    /// `G(z₁, z̄₂) − G(z₁, z̄) G(z, z̄₂) / G(z, z̄)`.
    pub fn conditioned_kernel(&self, z: C64, z1: C64, z2bar: C64) -> Result<C64> {
        let zbar = z.conj();
        let gzz = self.kernel_value(z, zbar)?;
        if gzz.norm() == 0.0 || !gzz.is_finite() {
            return Err(Error::DegenerateConditioning);
        }
        let g12 = self.kernel_value(z1, z2bar)?;
        let g1z = self.kernel_value(z1, zbar)?;
        let gz2 = self.kernel_value(z, z2bar)?;
        Ok(g12 - g1z * gz2 / gzz)
    }

    /// Draws sample `index` of the run keyed by `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> SampledSection {
        let mut rng = rng::stream(seed, domain::COMPLEX_SECTION, index);
        let coefficients = self
            .variances
            .iter()
            .map(|&v| rng::complex_normal(&mut rng, v))
            .collect();
        SampledSection { coefficients }
    }
}

impl SampledSection {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn evaluate(&self, z: C64) -> C64 {
        evaluate_polynomial(&self.coefficients, z)
    }
}

/// Horner evaluation of `Σ c_i z^i`.
pub fn evaluate_polynomial(coefficients: &[C64], z: C64) -> C64 {
    coefficients
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn check_finite(zs: &[C64]) -> Result<()> {
    if zs.iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}
