//! Two toy special-geometry models with closed-form periods.
//!
//! * Cubic prepotential `F = −κ (X¹)³ / (6 X⁰)` in the gauge `X⁰ = 1`, one
//!   modulus `z` in the upper half plane. Periods are ordered
//!   `Π = (X⁰, X¹, F₁, F₀) = (1, z, −κz²/2, κz³/6)` and paired with
//!   `η[0][3] = η[1][2] = 1`, `η[3][0] = η[2][1] = −1`. This gives
//!   `e^{−K} = iΠ†ηΠ = (4κ/3) y³` with `y = Im z`.
//! * Rigid flux model `Π = (1, i)` with `η = [[0, −1], [1, 0]]`, so
//!   `iΠ†ηΠ = 2`. The only modulus is the dilaton-axion `τ`, which enters the
//!   Kähler potential as `−log Im τ`.
//!
//! In both models `K = −a log y + const` with `a = 3` (cubic) or `a = 1`
//! (rigid), which fixes every derivative used below:
//! `∂K = ia/(2y)`, `g = ∂∂̄K = a/(4y²)`, `∂∂K = −a/(4y²)`, and the metric
//! connection `Γ = ∂ log g = i/y`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::quad::{self, QuadConfig};
use crate::{Error, Result, C64};

/// Minimum `Im z` (or `Im τ`) of an admissible point.
pub const DOMAIN_MARGIN: f64 = 1e-6;
/// Relative tolerance of volume and curvature integrals.
pub const VOLUME_REL_TOL: f64 = 1e-6;
/// A point counts as critical when the invariant gradient norm is below this times `1 + |Z|`.
pub const CRITICAL_TOL: f64 = 1e-6;

static ETA_CUBIC: [[i64; 4]; 4] = [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]];
static ETA_RIGID: [[i64; 2]; 2] = [[0, -1], [1, 0]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    CubicPrepotential { kappa: f64 },
    RigidFlux,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodModel {
    kind: ModelKind,
}

/// Coordinate rectangle `[x0, x1] × [y0, y1]` in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let r = Self { x0, x1, y0, y1 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRegion("region bounds must be finite"));
        }
        if !self.is_empty() && self.y0 < DOMAIN_MARGIN {
            return Err(Error::InvalidRegion("region must satisfy Im >= 1e-6"));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        !(self.x1 > self.x0 && self.y1 > self.y0)
    }

    /// Closed containment.
    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }
}

/// Output of [`PeriodModel::hessian`], both `2×2` and row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian {
    pub raw: [[C64; 2]; 2],
    /// `e^{K/2} H / g`, whose determinant at an attractor is the normalized `|Z|²`.
    pub normalized: [[C64; 2]; 2],
}

fn det2(m: &[[C64; 2]; 2]) -> C64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl Hessian {
    pub fn det_raw(&self) -> C64 {
        det2(&self.raw)
    }

    pub fn det_normalized(&self) -> C64 {
        det2(&self.normalized)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    /// Third derivative coefficient `κ` of the prepotential; zero for the rigid model.
    pub yukawa: f64,
    /// `det(𝓡 + ω)` per unit coordinate area.
    pub density: f64,
}

impl PeriodModel {
    pub fn cubic(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter("kappa must be positive and finite"));
        }
        Ok(Self {
            kind: ModelKind::CubicPrepotential { kappa },
        })
    }

    pub fn rigid() -> Self {
        Self {
            kind: ModelKind::RigidFlux,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Number of moduli (`z` for the cubic model, `τ` for the rigid one).
    pub fn n_moduli(&self) -> usize {
        1
    }

    pub fn b3(&self) -> usize {
        match self.kind {
            ModelKind::CubicPrepotential { .. } => 4,
            ModelKind::RigidFlux => 2,
        }
    }

    pub fn eta(&self, i: usize, j: usize) -> i64 {
        match self.kind {
            ModelKind::CubicPrepotential { .. } => ETA_CUBIC[i][j],
            ModelKind::RigidFlux => ETA_RIGID[i][j],
        }
    }

    /// Row-major copy of the intersection form.
    pub fn eta_matrix(&self) -> Vec<i64> {
        let b = self.b3();
        (0..b * b).map(|k| self.eta(k / b, k % b)).collect()
    }

    /// Coefficient `a` in `K = −a log Im z + const`.
    fn log_weight(&self) -> f64 {
        match self.kind {
            ModelKind::CubicPrepotential { .. } => 3.0,
            ModelKind::RigidFlux => 1.0,
        }
    }

    pub fn is_admissible(&self, z: C64) -> bool {
        z.is_finite() && z.im >= DOMAIN_MARGIN
    }

    fn check(&self, z: C64) -> Result<()> {
        if self.is_admissible(z) {
            Ok(())
        } else {
            Err(Error::Inadmissible)
        }
    }

    /// `(Π, ∂Π, ∂²Π)` at `z`.
    pub fn period_jet(&self, z: C64) -> Result<[Vec<C64>; 3]> {
        self.check(z)?;
        let c = |re: f64| C64::new(re, 0.0);
        Ok(match self.kind {
            ModelKind::CubicPrepotential { kappa } => [
                alloc::vec![c(1.0), z, -z * z * (kappa / 2.0), z * z * z * (kappa / 6.0)],
                alloc::vec![c(0.0), c(1.0), -z * kappa, z * z * (kappa / 2.0)],
                alloc::vec![c(0.0), c(0.0), c(-kappa), z * kappa],
            ],
            ModelKind::RigidFlux => [
                alloc::vec![c(1.0), C64::new(0.0, 1.0)],
                alloc::vec![c(0.0); 2],
                alloc::vec![c(0.0); 2],
            ],
        })
    }

    pub fn period_vector(&self, z: C64) -> Result<Vec<C64>> {
        let [p, _, _] = self.period_jet(z)?;
        Ok(p)
    }

    /// `qᵀ η v` for a real coefficient vector `q`.
    pub fn pair(&self, q: &[f64], v: &[C64]) -> C64 {
        let b = self.b3();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..b {
            if q[i] == 0.0 {
                continue;
            }
            for j in 0..b {
                let e = self.eta(i, j);
                if e != 0 {
                    s += v[j] * (q[i] * e as f64);
                }
            }
        }
        s
    }

    /// `e^{−K}` from the periods alone, `iΠ†ηΠ`.
    pub fn period_volume(&self, z: C64) -> Result<f64> {
        let p = self.period_vector(z)?;
        let b = self.b3();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..b {
            for j in 0..b {
                let e = self.eta(i, j);
                if e != 0 {
                    s += p[i].conj() * p[j] * e as f64;
                }
            }
        }
        let v = (C64::new(0.0, 1.0) * s).re;
        if !(v > 0.0) {
            return Err(Error::NonPositiveVolume(v));
        }
        Ok(v)
    }

    /// Full Kähler potential; the rigid model adds `−log Im τ`.
    pub fn kahler_potential(&self, z: C64) -> Result<f64> {
        let v = self.period_volume(z)?;
        Ok(match self.kind {
            ModelKind::CubicPrepotential { .. } => -v.ln(),
            ModelKind::RigidFlux => -v.ln() - z.im.ln(),
        })
    }

    /// `∂K`.
    pub fn kahler_gradient(&self, z: C64) -> Result<C64> {
        self.check(z)?;
        Ok(C64::new(0.0, self.log_weight() / (2.0 * z.im)))
    }

    /// Metric component `g = ∂∂̄K`.
    pub fn metric(&self, z: C64) -> Result<f64> {
        self.check(z)?;
        Ok(self.log_weight() / (4.0 * z.im * z.im))
    }

    /// Metric at `points` and `∫_R g dx dy`.
    pub fn metric_and_volume(&self, region: Rect, points: &[C64]) -> Result<(Vec<f64>, f64)> {
        let gs = points.iter().map(|&z| self.metric(z)).collect::<Result<Vec<_>>>()?;
        Ok((gs, self.region_integral(region, |z| self.metric(z))?))
    }

    pub fn volume(&self, region: Rect) -> Result<f64> {
        self.region_integral(region, |z| self.metric(z))
    }

    /// `∫_R f dx dy` by adaptive quadrature.
    pub fn region_integral<F: Fn(C64) -> Result<f64>>(&self, region: Rect, f: F) -> Result<f64> {
        region.validate()?;
        if region.is_empty() {
            return Ok(0.0);
        }
        let r = quad::integrate_rect(
            |x, y| f(C64::new(x, y)),
            (region.x0, region.x1),
            (region.y0, region.y1),
            &[],
            QuadConfig::new(0.0, VOLUME_REL_TOL),
        )?;
        Ok(r.value)
    }

    /// `Z = qᵀηΠ(z)`.
    pub fn central_charge(&self, q: &[f64], z: C64) -> Result<C64> {
        Ok(self.pair(q, &self.period_vector(z)?))
    }

    /// `|Z|² / ∫Ω∧Ω̄`, excluding the `−log Im τ` term.
    pub fn normalized_z2(&self, q: &[f64], z: C64) -> Result<f64> {
        Ok(self.central_charge(q, z)?.norm_sqr() / self.period_volume(z)?)
    }

    fn require_moduli(&self) -> Result<f64> {
        match self.kind {
            ModelKind::CubicPrepotential { kappa } => Ok(kappa),
            ModelKind::RigidFlux => Err(Error::Unsupported("the rigid model has no complex-structure moduli")),
        }
    }

    /// `(Z, ∂Z, ∂²Z)` for a charge.
    fn charge_jet(&self, q: &[f64], z: C64) -> Result<[C64; 3]> {
        self.require_moduli()?;
        let [p, dp, ddp] = self.period_jet(z)?;
        Ok([self.pair(q, &p), self.pair(q, &dp), self.pair(q, &ddp)])
    }

    /// `D_z Z = ∂Z + (∂K) Z`.
    pub fn covariant_derivative(&self, q: &[f64], z: C64) -> Result<C64> {
        let [zc, dz, _] = self.charge_jet(q, z)?;
        Ok(dz + self.kahler_gradient(z)? * zc)
    }

    /// `e^{K/2} |D Z| / √g`, the gradient norm that is invariant under Kähler and coordinate changes.
    pub fn gradient_norm(&self, q: &[f64], z: C64) -> Result<f64> {
        let d = self.covariant_derivative(q, z)?;
        Ok(d.norm() / (self.period_volume(z)? * self.metric(z)?).sqrt())
    }

    /// `D_z D_z Z = ∂(DZ) + (∂K − Γ) DZ`.
    pub fn second_covariant_derivative(&self, q: &[f64], z: C64) -> Result<C64> {
        let [zc, dz, ddz] = self.charge_jet(q, z)?;
        let k = self.kahler_gradient(z)?;
        let g = self.metric(z)?;
        let dcov = dz + k * zc;
        // ∂(∂K) = −g for K = −a log y
        let d_dcov = ddz - zc * g + k * dz;
        let gamma = C64::new(0.0, 1.0 / z.im);
        Ok(d_dcov + (k - gamma) * dcov)
    }

    /// `|DDZ − 𝓕 g⁻¹ conj(DZ)|` with the Kähler-normalized coupling `𝓕 = −i e^K κ`.
    pub fn identity_residual(&self, q: &[f64], z: C64) -> Result<f64> {
        let kappa = self.require_moduli()?;
        let dd = self.second_covariant_derivative(q, z)?;
        let d = self.covariant_derivative(q, z)?;
        let coupling = C64::new(0.0, -kappa / self.period_volume(z)?);
        Ok((dd - coupling * d.conj() / self.metric(z)?).norm())
    }

    /// Complex Hessian `[[∂D̄Z̄, ∂DZ], [∂̄D̄Z̄, ∂̄DZ]] = [[gZ̄, ∂DZ], [conj(∂DZ), gZ]]` at a critical point.
    pub fn hessian(&self, q: &[f64], z: C64) -> Result<Hessian> {
        let [zc, dz, ddz] = self.charge_jet(q, z)?;
        let k = self.kahler_gradient(z)?;
        let g = self.metric(z)?;
        let dcov = dz + k * zc;
        let ev = self.period_volume(z)?;
        let scale = 1.0 + (zc.norm_sqr() / ev).sqrt();
        let residual = dcov.norm() / (ev * g).sqrt();
        if residual > CRITICAL_TOL * scale {
            return Err(Error::NotCritical {
                residual,
                bound: CRITICAL_TOL * scale,
            });
        }
        let d_dcov = ddz - zc * g + k * dz;
        Ok(build_hessian(zc, d_dcov, g, ev))
    }

    /// Yukawa coefficient and `det(𝓡 + ω)` with `𝓡 = −∂∂̄ log g = −1/(2y²)`.
    pub fn curvature_quantities(&self, z: C64) -> Result<Curvature> {
        let g = self.metric(z)?;
        let y = z.im;
        let yukawa = match self.kind {
            ModelKind::CubicPrepotential { kappa } => kappa,
            ModelKind::RigidFlux => 0.0,
        };
        Ok(Curvature {
            yukawa,
            density: g - 1.0 / (2.0 * y * y),
        })
    }

    /// `∫_R det(𝓡 + ω) dx dy`.
    pub fn curvature_integral(&self, region: Rect) -> Result<f64> {
        self.region_integral(region, |z| Ok(self.curvature_quantities(z)?.density))
    }

    fn require_flux(&self) -> Result<()> {
        match self.kind {
            ModelKind::RigidFlux => Ok(()),
            ModelKind::CubicPrepotential { .. } => Err(Error::Unsupported("flux superpotentials are only modelled on the rigid model")),
        }
    }

    /// `(A, B) = (fᵀηΠ, hᵀηΠ)`, so that `W = A + τB`.
    pub fn flux_periods(&self, f: &[f64], h: &[f64]) -> Result<(C64, C64)> {
        self.require_flux()?;
        let p = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        Ok((self.pair(f, &p), self.pair(h, &p)))
    }

    /// `W = (f + τh)ᵀηΠ`.
    pub fn superpotential(&self, f: &[f64], h: &[f64], tau: C64) -> Result<C64> {
        self.check(tau)?;
        let (a, b) = self.flux_periods(f, h)?;
        Ok(a + tau * b)
    }

    /// `D_τW = ∂_τW + (∂_τK) W`.
    pub fn flux_covariant_derivative(&self, f: &[f64], h: &[f64], tau: C64) -> Result<C64> {
        let (a, b) = self.flux_periods(f, h)?;
        self.check(tau)?;
        Ok(b + self.kahler_gradient(tau)? * (a + tau * b))
    }

    /// `(∂_τ D_τW, ∂̄_τ D_τW)`.
    pub fn flux_dw_derivatives(&self, f: &[f64], h: &[f64], tau: C64) -> Result<(C64, C64)> {
        let (a, b) = self.flux_periods(f, h)?;
        let k = self.kahler_gradient(tau)?;
        let g = self.metric(tau)?;
        let w = a + tau * b;
        Ok((w * (-g) + k * b, w * g))
    }

    /// Sign of the real Jacobian of `(Re D_τW, Im D_τW)` with respect to `(Re τ, Im τ)`.
    pub fn flux_morse_sign(&self, f: &[f64], h: &[f64], tau: C64) -> Result<i32> {
        let (d, dbar) = self.flux_dw_derivatives(f, h, tau)?;
        let det = d.norm_sqr() - dbar.norm_sqr();
        Ok(if det > 0.0 {
            1
        } else if det < 0.0 {
            -1
        } else {
            0
        })
    }

    /// Complex Hessian of `W` at a vacuum.
    pub fn flux_hessian(&self, f: &[f64], h: &[f64], tau: C64) -> Result<Hessian> {
        let w = self.superpotential(f, h, tau)?;
        let d = self.flux_covariant_derivative(f, h, tau)?;
        let g = self.metric(tau)?;
        let ek = (-self.kahler_potential(tau)?).exp();
        let scale = 1.0 + w.norm() / ek.sqrt();
        let residual = d.norm() / (ek * g).sqrt();
        if residual > CRITICAL_TOL * scale {
            return Err(Error::NotCritical {
                residual,
                bound: CRITICAL_TOL * scale,
            });
        }
        let (dd, _) = self.flux_dw_derivatives(f, h, tau)?;
        Ok(build_hessian(w, dd, g, ek))
    }
}

fn build_hessian(s: C64, d_ds: C64, g: f64, exp_minus_k: f64) -> Hessian {
    let raw = [[s.conj() * g, d_ds], [d_ds.conj(), s * g]];
    let c = 1.0 / (exp_minus_k.sqrt() * g);
    let normalized = [
        [raw[0][0] * c, raw[0][1] * c],
        [raw[1][0] * c, raw[1][1] * c],
    ];
    Hessian { raw, normalized }
}

/// `fᵀ η h` in exact integer arithmetic, `eta` row-major `b × b`.
pub fn flux_length(f: &[i64], h: &[i64], eta: &[i64]) -> i64 {
    let b = f.len();
    let mut s = 0i64;
    for i in 0..b {
        for j in 0..b {
            s += f[i] * eta[i * b + j] * h[j];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I: C64 = C64 { re: 0.0, im: 1.0 };

    fn cubic6() -> PeriodModel {
        PeriodModel::cubic(6.0).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn period_vectors() {
        assert_eq!(PeriodModel::rigid().period_vector(C64::new(0.3, 2.0)).unwrap(), alloc::vec![C64::new(1.0, 0.0), I]);
        let p = cubic6().period_vector(I).unwrap();
        let want = [C64::new(1.0, 0.0), I, C64::new(3.0, 0.0), -I];
        for (a, b) in p.iter().zip(want) {
            assert!(close(*a, b, 1e-15));
        }
        assert_eq!(cubic6().period_vector(C64::new(0.0, -1.0)), Err(Error::Inadmissible));
    }

    #[test]
    fn periods_are_holomorphic() {
        let m = cubic6();
        let z = C64::new(0.37, 1.21);
        let h = 1e-5;
        let p = |w: C64| m.period_vector(w).unwrap();
        let (px, mx, py, my) = (p(z + h), p(z - h), p(z + I * h), p(z - I * h));
        let dp = m.period_jet(z).unwrap()[1].clone();
        for k in 0..4 {
            let dx = (px[k] - mx[k]) / (2.0 * h);
            let dy = (py[k] - my[k]) / (2.0 * h);
            // ∂_x f + i ∂_y f = 0 for holomorphic f
            assert!((dx + I * dy).norm() < 1e-8);
            assert!((dx - dp[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn exp_minus_k_closed_forms() {
        let m = cubic6();
        assert!((m.period_volume(I).unwrap() - 8.0).abs() < 1e-13);
        for k in 0..20 {
            let z = C64::new(-1.0 + 0.1 * k as f64, 0.2 + 0.13 * k as f64);
            let want = 4.0 * 6.0 / 3.0 * z.im.powi(3);
            assert!((m.period_volume(z).unwrap() - want).abs() < 1e-12 * want);
        }
        let r = PeriodModel::rigid();
        assert!((r.period_volume(I).unwrap() - 2.0).abs() < 1e-15);
        let t = C64::new(0.2, 1.4);
        assert_eq!(r.kahler_potential(t).unwrap(), r.kahler_potential(t + 1.0).unwrap());
    }

    #[test]
    fn metric_matches_finite_difference_of_k() {
        for m in [cubic6(), PeriodModel::rigid()] {
            let z = C64::new(0.2, 0.9);
            let h = 1e-3;
            let k = |w: C64| m.kahler_potential(w).unwrap();
            let lap = (k(z + h) + k(z - h) + k(z + I * h) + k(z - I * h) - 4.0 * k(z)) / (h * h);
            let g = m.metric(z).unwrap();
            assert!((lap / 4.0 - g).abs() < 1e-6 * g);
            // ∂K = (∂_x − i∂_y)K / 2
            let dk = C64::new((k(z + h) - k(z - h)) / (2.0 * h), -(k(z + I * h) - k(z - I * h)) / (2.0 * h)) * 0.5;
            assert!(close(dk, m.kahler_gradient(z).unwrap(), 1e-6));
        }
    }

    #[test]
    fn volumes() {
        let r = PeriodModel::rigid();
        let v = r.volume(Rect::new(0.0, 1.0, 1.0, 2.0).unwrap()).unwrap();
        assert!((v - 0.125).abs() < 1e-6 * 0.125);
        let m = cubic6();
        assert_eq!(m.volume(Rect::new(0.0, 0.0, 1.0, 2.0).unwrap()).unwrap(), 0.0);
        let v = m.volume(Rect::new(-0.4, 0.4, 0.8, 1.6).unwrap()).unwrap();
        let want = 0.75 * 0.8 * (1.0 / 0.8 - 1.0 / 1.6);
        assert!((v - want).abs() < 1e-6 * want);
        assert!(Rect::new(0.0, 1.0, -1.0, 1.0).is_err());
        let (gs, _) = m.metric_and_volume(Rect::new(0.0, 1.0, 1.0, 2.0).unwrap(), &[I]).unwrap();
        assert_eq!(gs, alloc::vec![0.75]);
    }

    #[test]
    fn central_charge_basics() {
        let m = cubic6();
        let z = C64::new(0.1, 1.3);
        assert_eq!(m.central_charge(&[0.0; 4], z).unwrap(), C64::new(0.0, 0.0));
        let g1 = [1.0, -2.0, 0.0, 3.0];
        let g2 = [0.0, 1.0, 5.0, -1.0];
        let sum: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
        let lhs = m.central_charge(&sum, z).unwrap();
        let rhs = m.central_charge(&g1, z).unwrap() + m.central_charge(&g2, z).unwrap();
        assert!(close(lhs, rhs, 1e-13));
        let neg: Vec<f64> = g1.iter().map(|x| -x).collect();
        assert_eq!(m.normalized_z2(&g1, z).unwrap(), m.normalized_z2(&neg, z).unwrap());
        let z2 = m.normalized_z2(&[1.0, 0.0, 0.0, 0.0], I).unwrap();
        let zc = m.central_charge(&[1.0, 0.0, 0.0, 0.0], I).unwrap();
        assert!((z2 - zc.norm_sqr() / m.period_volume(I).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rigid_superpotential_expansion() {
        let r = PeriodModel::rigid();
        let (f, h) = ([1.0, 0.0], [0.0, 1.0]);
        // f = (1,0): fᵀηΠ = η01 · i = −i; h = (0,1): hᵀηΠ = η10 · 1 = 1
        assert!(close(r.superpotential(&f, &h, I).unwrap(), -I + I * 1.0, 1e-15));
        let t = C64::new(0.3, 1.7);
        let (f, h) = ([2.0, -1.0], [3.0, 1.0]);
        let a = C64::new(f[1], -f[0]);
        let b = C64::new(h[1], -h[0]);
        assert!(close(r.superpotential(&f, &h, t).unwrap(), a + t * b, 1e-14));
    }

    #[test]
    fn rigid_d_tau_with_vanishing_h() {
        let r = PeriodModel::rigid();
        let t = C64::new(-0.2, 1.3);
        let (f, h) = ([1.0, 2.0], [0.0, 0.0]);
        let w = r.superpotential(&f, &h, t).unwrap();
        let d = r.flux_covariant_derivative(&f, &h, t).unwrap();
        assert!(close(d, -w / (t - t.conj()), 1e-15));
        assert!(d.norm() > 0.0);
    }

    #[test]
    fn covariant_derivative_matches_finite_difference() {
        let m = cubic6();
        let q = [1.0, -1.0, 2.0, 1.0];
        let z = C64::new(0.15, 1.1);
        let h = 1e-5;
        // D Z = e^{-K} ∂(e^{K} Z) with ∂ = (∂_x − i∂_y)/2 applied to a non-holomorphic function
        let f = |w: C64| m.central_charge(&q, w).unwrap() / m.period_volume(w).unwrap();
        let dfx = (f(z + h) - f(z - h)) / (2.0 * h);
        let dfy = (f(z + I * h) - f(z - I * h)) / (2.0 * h);
        let fd = (dfx - I * dfy) * 0.5 * m.period_volume(z).unwrap();
        assert!(close(fd, m.covariant_derivative(&q, z).unwrap(), 1e-6));
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let m = cubic6();
        let q = [2.0, 1.0, -1.0, 1.0];
        let z = C64::new(-0.3, 0.9);
        let h = 1e-5;
        let d = |w: C64| m.covariant_derivative(&q, w).unwrap();
        let dx = (d(z + h) - d(z - h)) / (2.0 * h);
        let dy = (d(z + I * h) - d(z - I * h)) / (2.0 * h);
        let holo = (dx - I * dy) * 0.5;
        let anti = (dx + I * dy) * 0.5;
        let g = m.metric(z).unwrap();
        let zc = m.central_charge(&q, z).unwrap();
        assert!(close(anti, zc * g, 1e-6 * (1.0 + zc.norm())));
        let k = m.kahler_gradient(z).unwrap();
        let gamma = I / z.im;
        let want = holo + (k - gamma) * d(z);
        assert!(close(want, m.second_covariant_derivative(&q, z).unwrap(), 1e-6 * (1.0 + want.norm())));
    }

    #[test]
    fn yukawa_and_curvature() {
        let m = cubic6();
        let c = m.curvature_quantities(C64::new(0.3, 1.7)).unwrap();
        assert_eq!(c.yukawa, 6.0);
        let y = 1.7;
        assert!((c.density - 1.0 / (4.0 * y * y)).abs() < 1e-15);
        let r = PeriodModel::rigid();
        let c = r.curvature_quantities(C64::new(0.0, y)).unwrap();
        assert!((c.density + 1.0 / (4.0 * y * y)).abs() < 1e-15);
    }

    #[test]
    fn curvature_matches_finite_difference() {
        for m in [cubic6(), PeriodModel::rigid()] {
            let z = C64::new(0.1, 1.3);
            let h = 1e-3;
            let lg = |w: C64| m.metric(w).unwrap().ln();
            let lap = (lg(z + h) + lg(z - h) + lg(z + I * h) + lg(z - I * h) - 4.0 * lg(z)) / (h * h);
            let curv = -lap / 4.0;
            let want = m.curvature_quantities(z).unwrap().density;
            assert!((curv + m.metric(z).unwrap() - want).abs() < 1e-6 * want.abs());
        }
    }

    #[test]
    fn hessian_rejects_non_critical_points() {
        let m = cubic6();
        let r = m.hessian(&[1.0, 0.0, 0.0, 1.0], C64::new(0.2, 1.0));
        assert!(matches!(r, Err(Error::NotCritical { .. })));
    }

    #[test]
    fn rigid_hessian_determinant_is_real() {
        let r = PeriodModel::rigid();
        let (f, h) = ([3.0, 1.0], [-1.0, 2.0]);
        // L = f1 h0 − f0 h1 = −1 − 6 < 0: swap to get a vacuum
        let (f, h) = (h, f);
        let (a, b) = r.flux_periods(&f, &h).unwrap();
        let tau = -a.conj() / b.conj();
        assert!(tau.im > 0.0);
        let hs = r.flux_hessian(&f, &h, tau).unwrap();
        assert!(hs.det_raw().im.abs() < 1e-12 * hs.det_raw().norm());
        assert_eq!(r.flux_morse_sign(&f, &h, tau).unwrap(), -1);
        let g = r.metric(tau).unwrap();
        let w = r.superpotential(&f, &h, tau).unwrap();
        assert_eq!(hs.raw[1][0], hs.raw[0][1].conj());
        assert!(close(hs.raw[1][1], w * g, 1e-12 * (w * g).norm()));
    }

    #[test]
    fn flux_lengths() {
        let eta = [0, 1, -1, 0];
        assert_eq!(flux_length(&[1, 0], &[0, 1], &eta), 1);
        assert_eq!(flux_length(&[0, 1], &[1, 0], &eta), -1);
        let r = PeriodModel::rigid();
        let eta = r.eta_matrix();
        let (f, h) = ([4i64, -3], [2i64, 5]);
        let l = flux_length(&f, &h, &eta) as f64;
        for k in 0..10 {
            let t = C64::new(-0.5 + 0.1 * k as f64, 0.5 + 0.3 * k as f64);
            let re: Vec<f64> = (0..2).map(|i| f[i] as f64 + t.re * h[i] as f64).collect();
            let im: Vec<f64> = (0..2).map(|i| t.im * h[i] as f64).collect();
            let wedge = flux_length_f64(&re, &im, &eta) / t.im;
            assert!((wedge - l).abs() < 1e-12 * l.abs().max(1.0));
        }
    }

    fn flux_length_f64(a: &[f64], b: &[f64], eta: &[i64]) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += a[i] * eta[i * 2 + j] as f64 * b[j];
            }
        }
        s
    }

    proptest! {
        #[test]
        fn special_geometry_identity(x in -2.0f64..2.0, y in 0.2f64..3.0,
                                     q in proptest::collection::vec(-5i64..=5, 4)) {
            let m = cubic6();
            let q: Vec<f64> = q.iter().map(|&v| v as f64).collect();
            let z = C64::new(x, y);
            let scale = 1.0 + m.second_covariant_derivative(&q, z).unwrap().norm();
            prop_assert!(m.identity_residual(&q, z).unwrap() <= 1e-8 * scale);
        }

        #[test]
        fn positivity(x in -5.0f64..5.0, y in 1e-3f64..10.0, kappa in 0.1f64..20.0) {
            let m = PeriodModel::cubic(kappa).unwrap();
            let z = C64::new(x, y);
            prop_assert!(m.period_volume(z).unwrap() > 0.0);
            prop_assert!(m.metric(z).unwrap() > 0.0);
            prop_assert!(PeriodModel::rigid().metric(z).unwrap() > 0.0);
        }

        #[test]
        fn projective_invariance(x in -2.0f64..2.0, y in 0.3f64..3.0, lr in -3.0f64..3.0, li in -3.0f64..3.0) {
            let m = cubic6();
            let z = C64::new(x, y);
            let lam = C64::new(lr, li);
            prop_assume!(lam.norm() > 1e-3);
            let q = [1.0, 2.0, -1.0, 1.0];
            let p: Vec<C64> = m.period_vector(z).unwrap().iter().map(|v| v * lam).collect();
            let zc = m.pair(&q, &p);
            let mut s = C64::new(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    s += p[i].conj() * p[j] * m.eta(i, j) as f64;
                }
            }
            let scaled = zc.norm_sqr() / (I * s).re;
            let base = m.normalized_z2(&q, z).unwrap();
            prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1e-300));
        }
    }
}
