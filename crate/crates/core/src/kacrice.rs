//! Expected zero densities of Gaussian random polynomials.
//!
//! For a Gaussian ensemble with kernel `G`, the expected density of complex
//! zeros per unit area is `(1/π) ∂∂̄ log G(z, z̄)`. For kernels of the form
//! `G = Σ σ_k² |z|^{2k}` this equals `A(u)/π` with `u = |z|²` and
//!
//! ```text
//! A(u) = d/du (u d/du log G) = Var_u(k) / u,
//! ```
//!
//! the variance of `k` under weights `σ_k² u^k`. The same `A` gives Kac's
//! real-zero density `√A(t²) / π` for real coefficients with unit variance.
//! The variance form has no removable singularity at `u = 1`, so it is used
//! as the limit branch near the unit circle.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::grid::{DensityGrid, GridSpec};
use crate::quad::{self, QuadConfig};
use crate::{Error, Result, C64};

/// Width of the band `|1 − u| < KAC_MOMENT_WINDOW` served by the variance form.
pub const KAC_MOMENT_WINDOW: f64 = 1e-2;

/// Finite-difference step for the generic Laplacian of `log G`.
pub const FD_STEP: f64 = 1e-4;

/// Relative gap between the `h` and `2h` Laplacians that flags ill-conditioning.
pub const FD_RICHARDSON_TOL: f64 = 1e-4;

/// Clamp for small negative square-root arguments, relative to `1/(1−t²)²`.
pub const SQRT_CLAMP: f64 = 1e-12;

/// `Var_u(k) / u` for weights `u^k`, `k = 0..=n`, computed in log space.
fn kac_moment(n: usize, u: f64) -> f64 {
    debug_assert!(u > 0.0);
    let lu = u.ln();
    let top = if lu > 0.0 { n as f64 * lu } else { 0.0 };
    let (mut s0, mut s1) = (0.0, 0.0);
    let weights: Vec<f64> = (0..=n).map(|k| (k as f64 * lu - top).exp()).collect();
    for (k, w) in weights.iter().enumerate() {
        s0 += w;
        s1 += w * k as f64;
    }
    let mean = s1 / s0;
    let var = weights
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let d = k as f64 - mean;
            w * d * d
        })
        .sum::<f64>()
        / s0;
    var / u
}

/// `1/(1−u)² − (N+1)² u^N / (1 − u^{N+1})²` without the limit branch.
fn kac_closed(n: usize, u: f64) -> f64 {
    let np1 = (n + 1) as f64;
    let first = 1.0 / ((1.0 - u) * (1.0 - u));
    let second = if u <= 1.0 {
        let un = u.powi(n as i32);
        np1 * np1 * un / ((1.0 - un * u) * (1.0 - un * u))
    } else {
        // u^N / (u^{N+1} − 1)² = v^{N+2} / (1 − v^{N+1})², v = 1/u
        let v = 1.0 / u;
        let vn1 = v.powi(n as i32 + 1);
        np1 * np1 * vn1 * v / ((1.0 - vn1) * (1.0 - vn1))
    };
    first - second
}

/// `A(u)` for the Kac ensemble with the limit branch near `u = 1`.
fn kac_a(n: usize, u: f64) -> f64 {
    if u > 1.0 {
        // zeros are invariant under z → 1/z: A(u) = A(1/u) / u²
        let v = 1.0 / u;
        return kac_a(n, v) * v * v;
    }
    if 1.0 - u < KAC_MOMENT_WINDOW {
        kac_moment(n, u)
    } else {
        kac_closed(n, u)
    }
}

/// Expected density of complex zeros per unit area at `z`.
pub fn complex_zero_density(e: &EnsembleSpec, z: C64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite);
    }
    let u = z.norm_sqr();
    let n = e.degree();
    Ok(match e.kind() {
        EnsembleKind::Kac => kac_a(n, u) / PI,
        EnsembleKind::Kostlan => n as f64 / (PI * (1.0 + u) * (1.0 + u)),
    })
}

/// Finite-difference density `(1/4π) Δ log G(z, z̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdDensity {
    /// Estimate at step [`FD_STEP`].
    pub value: f64,
    /// Estimate at step `2 FD_STEP`.
    pub coarse: f64,
    pub ill_conditioned: bool,
}

/// Generic density from a five-point Laplacian of `log G`.
///
/// Works for any ensemble: `G` on the diagonal is summed term by term (all
/// terms are nonnegative there), and `log G` is differenced as
/// `log(G(p)/G(z))` so that the result does not lose digits to the size of
/// `log G` itself.
pub fn complex_zero_density_fd(e: &EnsembleSpec, z: C64) -> Result<FdDensity> {
    if !z.is_finite() {
        return Err(Error::NonFinite);
    }
    let g = |p: C64| e.kernel_direct(p, p.conj()).re;
    let g0 = g(z);
    let rel = |p: C64| ((g(p) - g0) / g0).ln_1p();
    let lap = |h: f64| {
        let s = rel(z + C64::new(h, 0.0))
            + rel(z - C64::new(h, 0.0))
            + rel(z + C64::new(0.0, h))
            + rel(z - C64::new(0.0, h));
        s / (h * h) / (4.0 * PI)
    };
    let value = lap(FD_STEP);
    let coarse = lap(2.0 * FD_STEP);
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(FdDensity {
        value,
        coarse,
        ill_conditioned: (value - coarse).abs() > FD_RICHARDSON_TOL * value.abs(),
    })
}

/// Kac's density of real zeros evaluated straight from the closed form.
///
/// Small negative square-root arguments from roundoff are clamped to zero;
/// larger ones are reported as [`Error::NumericalInconsistency`].
pub fn real_zero_density_closed(n: usize, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let u = t * t;
    let arg = kac_closed(n, u);
    let scale = 1.0 / ((1.0 - u) * (1.0 - u));
    if arg < 0.0 {
        if arg >= -SQRT_CLAMP * scale {
            return Ok(0.0);
        }
        return Err(Error::NumericalInconsistency { t, value: arg });
    }
    Ok(arg.sqrt() / PI)
}

/// Kac's real-zero density from the variance form; finite at `|t| = 1`.
pub fn real_zero_density_moment(n: usize, t: f64) -> f64 {
    let u = t * t;
    if u == 0.0 {
        return 1.0 / PI;
    }
    kac_moment(n, u).sqrt() / PI
}

/// Expected number of real zeros per unit length at `t` for a degree-`n`
/// polynomial with independent standard normal coefficients.
pub fn real_zero_density(n: usize, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if t.abs() > 1.0 {
        let s = 1.0 / t;
        return Ok(real_zero_density(n, s)? * s * s);
    }
    if (1.0 - t * t) < KAC_MOMENT_WINDOW {
        Ok(real_zero_density_moment(n, t))
    } else {
        real_zero_density_closed(n, t)
    }
}

/// Absolute tolerance of [`expected_real_zeros`].
pub const REAL_ZEROS_ABS_TOL: f64 = 1e-6;

/// Expected number of real zeros, `∫_ℝ ρ(t) dt = 2 ∫_{-1}^{1} ρ(t) dt`.
///
/// The reflection `ρ(t) = ρ(1/t)/t²` maps `|t| > 1` onto `|t| < 1`.
pub fn expected_real_zeros(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidDegree(n));
    }
    let cfg = QuadConfig {
        abs_tol: REAL_ZEROS_ABS_TOL / 2.0,
        rel_tol: 0.0,
        max_intervals: 50_000,
    };
    let r = quad::integrate_with_breaks(|t| real_zero_density(n, t), &[-1.0, 0.0, 1.0], cfg)?;
    Ok(2.0 * r.value)
}

/// A region of the plane for mass integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneRegion {
    /// `r0 ≤ |z| < r1`; `r1` may be infinite.
    Annulus { r0: f64, r1: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl PlaneRegion {
    pub fn contains(&self, z: C64) -> bool {
        match *self {
            PlaneRegion::Annulus { r0, r1 } => {
                let r = z.norm();
                r >= r0 && r < r1
            }
            PlaneRegion::Rectangle { x0, x1, y0, y1 } => {
                z.re >= x0 && z.re < x1 && z.im >= y0 && z.im < y1
            }
        }
    }

    fn is_empty(&self) -> bool {
        match *self {
            PlaneRegion::Annulus { r0, r1 } => !(r1 > r0),
            PlaneRegion::Rectangle { x0, x1, y0, y1 } => !(x1 > x0 && y1 > y0),
        }
    }
}

/// Relative tolerance of [`region_mass`].
pub const REGION_MASS_REL_TOL: f64 = 1e-5;

/// Expected number of zeros in `region`, by 2D adaptive quadrature.
pub fn region_mass(e: &EnsembleSpec, region: PlaneRegion) -> Result<f64> {
    if region.is_empty() {
        return Ok(0.0);
    }
    let cfg = QuadConfig {
        abs_tol: 1e-12,
        rel_tol: REGION_MASS_REL_TOL,
        max_intervals: 20_000,
    };
    let inner = QuadConfig {
        abs_tol: 1e-14,
        rel_tol: REGION_MASS_REL_TOL * 0.1,
        max_intervals: 20_000,
    };
    match region {
        PlaneRegion::Annulus { r0, r1 } => {
            if r0 < 0.0 || r0.is_nan() {
                return Err(Error::InvalidRegion("annulus radii must satisfy 0 <= r0 < r1"));
            }
            // r ∫ ρ(r e^{iθ}) dθ
            let ring = |r: f64| -> Result<f64> {
                let q = quad::integrate(
                    |th| complex_zero_density(e, C64::from_polar(r, th)),
                    0.0,
                    2.0 * PI,
                    inner,
                )?;
                Ok(r * q.value)
            };
            let split = r0.max(1.0);
            let mut total = 0.0;
            let finite_top = r1.min(split);
            if finite_top > r0 {
                let mut breaks = alloc::vec![r0];
                if 1.0 > r0 && 1.0 < finite_top {
                    breaks.push(1.0);
                }
                breaks.push(finite_top);
                total += quad::integrate_with_breaks(ring, &breaks, cfg)?.value;
            }
            if r1 > split {
                if r1.is_infinite() {
                    // r = 1/s
                    let tail = |s: f64| -> Result<f64> {
                        if s == 0.0 {
                            return Ok(0.0);
                        }
                        Ok(ring(1.0 / s)? / (s * s))
                    };
                    total += quad::integrate(tail, 0.0, 1.0 / split, cfg)?.value;
                } else {
                    total += quad::integrate(ring, split, r1, cfg)?.value;
                }
            }
            Ok(total)
        }
        PlaneRegion::Rectangle { x0, x1, y0, y1 } => {
            if ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidRegion("rectangle must be finite"));
            }
            let r = quad::integrate_rect(
                |x, y| complex_zero_density(e, C64::new(x, y)),
                (x0, x1),
                (y0, y1),
                &[],
                cfg,
            )?;
            Ok(r.value)
        }
    }
}

/// Density sampled at cell centres.
pub fn density_grid(e: &EnsembleSpec, spec: GridSpec) -> Result<DensityGrid> {
    spec.validate()?;
    let values = (0..spec.cells())
        .map(|k| complex_zero_density(e, spec.cell_center(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid { spec, values })
}

/// Expected number of zeros in every cell, integrated over the cell.
pub fn cell_masses(e: &EnsembleSpec, spec: GridSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    (0..spec.cells())
        .map(|k| {
            let ((x0, x1), (y0, y1)) = spec.cell_bounds(k);
            region_mass(e, PlaneRegion::Rectangle { x0, x1, y0, y1 })
        })
        .collect()
}
