//! Globally adaptive Gauss–Kronrod (7, 15) quadrature on finite intervals.

use alloc::vec::Vec;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Piece>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(Piece { a, b, value, error })
}

/// Integrates `f` over the union of consecutive intervals `[breaks[i], breaks[i+1]]`.
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_with_breaks<F>(mut f: F, breaks: &[f64], cfg: QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut pieces: Vec<Piece> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            pieces.push(kronrod(&mut f, w[0], w[1])?);
        }
    }
    if pieces.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                intervals: pieces.len(),
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = pieces[worst];
        let mid = 0.5 * (p.a + p.b);
        // interval can no longer be split in floating point
        if pieces.len() >= cfg.max_intervals || !(p.a < mid && mid < p.b) {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: pieces.len(),
            });
        }
        pieces[worst] = kronrod(&mut f, p.a, mid)?;
        pieces.push(kronrod(&mut f, mid, p.b)?);
    }
}

pub fn integrate<F>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Iterated integral over a rectangle, inner variable `y`.
///
/// The inner integrals run at a tenth of the outer tolerances so that their
/// error does not dominate the outer estimate.
pub fn integrate_rect<F>(
    mut f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    y_breaks: &[f64],
    cfg: QuadConfig,
) -> Result<QuadResult>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let inner_cfg = QuadConfig {
        abs_tol: cfg.abs_tol * 0.1 / (x1 - x0).abs().max(1.0),
        rel_tol: cfg.rel_tol * 0.1,
        max_intervals: cfg.max_intervals,
    };
    let mut ys: Vec<f64> = Vec::with_capacity(y_breaks.len() + 2);
    ys.push(y0);
    ys.extend(y_breaks.iter().copied().filter(|&t| t > y0 && t < y1));
    ys.push(y1);
    integrate(
        |x| integrate_with_breaks(|y| f(x, y), &ys, inner_cfg).map(|r| r.value),
        x0,
        x1,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Ok(x * x * x - 2.0 * x), 0.0, 2.0, QuadConfig::new(1e-14, 1e-14)).unwrap();
        assert!((r.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_converges() {
        // ∫ eps / (x^2 + eps^2) over [-1, 1] = 2 atan(1/eps)
        let eps = 1e-4;
        let r = integrate(|x| Ok(eps / (x * x + eps * eps)), -1.0, 1.0, QuadConfig::new(1e-10, 1e-12)).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((r.value - exact).abs() < 1e-9, "{} vs {}", r.value, exact);
    }

    #[test]
    fn empty_interval_is_zero() {
        let r = integrate(|_| Ok(1.0), 1.0, 1.0, QuadConfig::new(1e-10, 1e-10)).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn rectangle_matches_product() {
        let r = integrate_rect(
            |x, y| Ok((x).sin() * (-y).exp()),
            (0.0, PI),
            (0.0, 1.0),
            &[],
            QuadConfig::new(1e-12, 1e-12),
        )
        .unwrap();
        let exact = 2.0 * (1.0 - (-1.0f64).exp());
        assert!((r.value - exact).abs() < 1e-11);
    }

    #[test]
    fn errors_propagate() {
        let r = integrate(|_| Err(Error::NonFinite), 0.0, 1.0, QuadConfig::new(1e-10, 1e-10));
        assert_eq!(r, Err(Error::NonFinite));
    }
}
