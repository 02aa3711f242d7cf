//! All roots of a complex polynomial by Aberth–Ehrlich iteration.
//!
//! Starting points come from the Newton polygon of `log |c_i|`, and the
//! Newton correction for `|z| > 1` is computed on the reversed polynomial so
//! that large roots do not overflow. Residuals are reported on the same
//! chart: `|f(z)|` inside the unit disk and `|f(z)| / |z|^N` outside it.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::ensembles::evaluate_polynomial;
use crate::{Error, Result, C64};

/// Coefficients smaller than this fraction of the largest are trimmed from the top.
pub const TRIM_REL: f64 = 1e-14;
/// Residual bound `RESIDUAL_REL · (1 + max|c_i|)`.
pub const RESIDUAL_REL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 2_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<C64>,
    pub residuals: Vec<f64>,
}

impl RootSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// `(p, p')` at `z` by Horner.
fn horner2(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &ci in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ci;
    }
    (p, dp)
}

/// Same as [`horner2`] for the reversed coefficient list.
fn horner2_rev(c: &[C64], w: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &ci in c.iter() {
        dp = dp * w + p;
        p = p * w + ci;
    }
    (p, dp)
}

/// Newton correction `p(z)/p'(z)`, or `None` when `z` is an exact root.
fn newton_ratio(c: &[C64], z: C64) -> Option<C64> {
    let d = (c.len() - 1) as f64;
    if z.norm() <= 1.0 {
        let (p, dp) = horner2(c, z);
        if p.norm() == 0.0 {
            return None;
        }
        Some(p / dp)
    } else {
        // p(z) = z^d q(1/z) ⇒ p/p' = z q / (d q − w q')
        let w = z.inv();
        let (q, dq) = horner2_rev(c, w);
        if q.norm() == 0.0 {
            return None;
        }
        Some(z * q / (q * d - w * dq))
    }
}

/// `|p(z)|` inside the unit disk, `|p(z)| / |z|^d` outside.
pub fn chart_residual(c: &[C64], z: C64) -> f64 {
    if z.norm() <= 1.0 {
        evaluate_polynomial(c, z).norm()
    } else {
        let w = z.inv();
        c.iter().fold(C64::new(0.0, 0.0), |acc, &ci| acc * w + ci).norm()
    }
}

/// Newton-polygon starting points for Aberth iteration.
fn initial_guesses(c: &[C64]) -> Vec<C64> {
    let d = c.len() - 1;
    let logs: Vec<f64> = c
        .iter()
        .map(|x| if x.norm() > 0.0 { x.norm().ln() } else { f64::NEG_INFINITY })
        .collect();
    // upper convex hull of (i, log|c_i|)
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..=d {
        if logs[i] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b as f64 - a as f64) * (logs[i] - logs[a])
                - (i as f64 - a as f64) * (logs[b] - logs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(d);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let k = j - i;
        let r = ((logs[i] - logs[j]) / k as f64).exp();
        for m in 0..k {
            let angle = 2.0 * PI * (m as f64 / k as f64 + i as f64 / d as f64) + sigma;
            out.push(C64::from_polar(r, angle));
        }
    }
    out
}

fn aberth(c: &[C64]) -> Vec<C64> {
    let mut z = initial_guesses(c);
    let n = z.len();
    let mut done = alloc::vec![false; n];
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ratio = match newton_ratio(c, z[i]) {
                Some(r) => r,
                None => {
                    done[i] = true;
                    continue;
                }
            };
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (1.0 - ratio * s);
            if !step.is_finite() {
                // coincident iterates; nudge and retry next sweep
                let nudge = C64::new(1e-8, 1e-8) * (1.0 + z[i].norm());
                z[i] += nudge;
                all_done = false;
                continue;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

/// All roots of `Σ c_i z^i`, each polished by one Newton step.
///
/// Coefficients below [`TRIM_REL`]`· max|c_i|` at the top end are dropped.
/// Exactly vanishing low coefficients give exact roots at the origin.
pub fn find_roots(coeffs: &[C64]) -> Result<RootSet> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite);
    }
    let max = coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    if max == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let mut top = coeffs.len() - 1;
    while coeffs[top].norm() < TRIM_REL * max {
        top -= 1;
    }
    let full = &coeffs[..=top];
    let zeros_at_origin = full.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &full[zeros_at_origin..];

    let mut roots: Vec<C64> = alloc::vec![C64::new(0.0, 0.0); zeros_at_origin];
    match reduced.len() {
        0 | 1 => {}
        2 => roots.push(-reduced[0] / reduced[1]),
        _ => {
            for z in aberth(reduced) {
                let polished = match newton_ratio(reduced, z) {
                    Some(r) => {
                        let cand = z - r;
                        if cand.is_finite() && chart_residual(reduced, cand) <= chart_residual(reduced, z) {
                            cand
                        } else {
                            z
                        }
                    }
                    None => z,
                };
                roots.push(polished);
            }
        }
    }
    let residuals = roots.iter().map(|&z| chart_residual(full, z)).collect();
    Ok(RootSet { roots, residuals })
}
