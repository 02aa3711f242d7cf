//! Attractor points of the cubic model and flux vacua of the rigid model:
//! solvers, lattice enumeration, continuum estimates and the asymptotic
//! density formulas they are compared against.
//!
//! Enumeration is organised in slabs (fixed leading charge or flux
//! components) so a caller can scan slabs in parallel and concatenate the
//! results in slab order.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use crate::rng::{self, domain};
use crate::special_geometry::{flux_length, ModelKind, PeriodModel, Rect, DOMAIN_MARGIN};
use crate::stats;
use crate::{Error, Result, C64};

/// Iteration cap of [`attractor_flow`].
pub const MAX_FLOW_ITERATIONS: usize = 10_000;
/// Converged when `e^{K/2}|DZ|/√g ≤ GRADIENT_TOL · (1 + |Z|_norm)`.
pub const GRADIENT_TOL: f64 = 1e-9;
/// Critical points of one source closer than this are the same point.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Coarse start grid per axis for attractor enumeration.
pub const DEFAULT_START_GRID: usize = 3;
/// Flows leaving `|x|, y < ESCAPE` are abandoned.
const ESCAPE: f64 = 1e6;
/// Switch from descent to Newton once the relative gradient drops below this.
const NEWTON_SWITCH: f64 = 1e-3;
/// Accepted steps may raise the objective by at most this relative amount (rounding).
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluxVector {
    pub f: [i64; 2],
    pub h: [i64; 2],
}

impl FluxVector {
    pub fn max_norm(&self) -> i64 {
        self.f.iter().chain(&self.h).map(|v| v.abs()).max().unwrap_or(0)
    }

    fn as_f64(&self) -> ([f64; 2], [f64; 2]) {
        (
            [self.f[0] as f64, self.f[1] as f64],
            [self.h[0] as f64, self.h[1] as f64],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Charge([i64; 4]),
    Flux(FluxVector),
}

impl Source {
    pub fn max_norm(&self) -> i64 {
        match self {
            Source::Charge(g) => g.iter().map(|v| v.abs()).max().unwrap_or(0),
            Source::Flux(fl) => fl.max_norm(),
        }
    }
}

/// A located attractor point or flux vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPointRecord {
    pub source: Source,
    pub location: C64,
    /// Normalized `|Z|²` for attractors, `e^K |W|²` for flux vacua.
    pub value: f64,
    /// Superpotential at a flux vacuum.
    pub superpotential: Option<C64>,
    /// Flux length `fᵀηh`, flux vacua only.
    pub length: Option<i64>,
    pub gradient_norm: f64,
    /// Sign of the real Jacobian determinant of the critical-point equations.
    pub sign: i32,
    pub converged: bool,
}

/// Counting outcome for one region and control parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountReport {
    pub region: Rect,
    /// `Z_max` or `L_max`.
    pub control: f64,
    pub count: u64,
    pub signed_index: i64,
    pub prediction: f64,
    /// `count / prediction`, or `signed_index / prediction` for index predictions.
    pub ratio: Option<f64>,
    pub box_size: i64,
    /// Count restricted to sources with `‖·‖∞ ≤ box_size − 1`.
    pub count_box_minus_one: u64,
    /// Box size beyond which no qualifying source can exist.
    pub sufficient_box: i64,
    pub non_converged: u64,
}

impl CountReport {
    /// True when the box provably contains every qualifying source.
    pub fn box_complete(&self) -> bool {
        self.box_size >= self.sufficient_box
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den != 0.0 {
        Some(num / den)
    } else {
        None
    }
}

// ---------------------------------------------------------------- attractors

/// `Z(z) = γᵀηΠ(z)` of the cubic model as a real cubic polynomial in `z`, plus
/// the closed-form Kähler data of the model.
#[derive(Debug, Clone, Copy)]
pub struct ChargeObjective {
    kappa: f64,
    /// `Z(z) = Σ c_k z^k`.
    c: [f64; 4],
}

struct Jet {
    z: C64,
    dz: C64,
    ddz: C64,
    volume: f64,
    metric: f64,
    kahler: C64,
}

impl Jet {
    fn value(&self) -> f64 {
        self.z.norm_sqr() / self.volume
    }

    fn dcov(&self) -> C64 {
        self.dz + self.kahler * self.z
    }

    fn gradient_norm(&self) -> f64 {
        self.dcov().norm() / (self.volume * self.metric).sqrt()
    }

    /// `(∂(DZ), ∂̄(DZ))`.
    fn dcov_derivatives(&self) -> (C64, C64) {
        (self.ddz - self.z * self.metric + self.kahler * self.dz, self.z * self.metric)
    }
}

impl ChargeObjective {
    pub fn new(m: &PeriodModel, gamma: &[f64]) -> Result<Self> {
        let kappa = match m.kind() {
            ModelKind::CubicPrepotential { kappa } => kappa,
            ModelKind::RigidFlux => return Err(Error::Unsupported("attractor points need complex-structure moduli")),
        };
        if gamma.len() != 4 {
            return Err(Error::InvalidParameter("charge must have four components"));
        }
        // coefficient vectors of Π in powers of z
        let basis: [[C64; 4]; 4] = {
            let r = |v: f64| C64::new(v, 0.0);
            [
                [r(1.0), r(0.0), r(0.0), r(0.0)],
                [r(0.0), r(1.0), r(0.0), r(0.0)],
                [r(0.0), r(0.0), r(-kappa / 2.0), r(0.0)],
                [r(0.0), r(0.0), r(0.0), r(kappa / 6.0)],
            ]
        };
        let mut c = [0.0; 4];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = m.pair(gamma, &basis[k]).re;
        }
        Ok(Self { kappa, c })
    }

    pub fn coefficients(&self) -> [f64; 4] {
        self.c
    }

    fn jet(&self, z: C64) -> Jet {
        let [c0, c1, c2, c3] = self.c;
        let y = z.im;
        Jet {
            z: ((z * c3 + c2) * z + c1) * z + c0,
            dz: (z * (3.0 * c3) + 2.0 * c2) * z + c1,
            ddz: z * (6.0 * c3) + 2.0 * c2,
            volume: 4.0 * self.kappa / 3.0 * y * y * y,
            metric: 0.75 / (y * y),
            kahler: C64::new(0.0, 1.5 / y),
        }
    }

    /// Normalized `|Z|²`.
    pub fn value(&self, z: C64) -> f64 {
        self.jet(z).value()
    }

    pub fn gradient_norm(&self, z: C64) -> f64 {
        self.jet(z).gradient_norm()
    }

    /// The unique upper-half-plane solution of `D_z Z = 0`, if any.
    ///
    /// Expanding `Z(x + iy)` in `iy` about real `x` splits `D_z Z = 0` into
    /// `3Z(x) + ½Z''(x) y² = 0` and `Z'(x) + ½Z'''(x) y² = 0`; the cubic terms
    /// cancel in the compatibility condition, which is linear in `x`.
    pub fn closed_form_point(&self) -> Option<C64> {
        let [c0, c1, c2, c3] = self.c;
        let (x, y2) = if c3 != 0.0 {
            let den = 12.0 * c1 * c3 - 4.0 * c2 * c2;
            if den == 0.0 {
                return None;
            }
            let x = (2.0 * c1 * c2 - 18.0 * c0 * c3) / den;
            let a1 = (3.0 * c3 * x + 2.0 * c2) * x + c1;
            (x, -a1 / (3.0 * c3))
        } else if c2 != 0.0 {
            let x = -c1 / (2.0 * c2);
            let a0 = (c2 * x + c1) * x + c0;
            (x, -3.0 * a0 / c2)
        } else {
            return None;
        };
        if y2 > 0.0 && x.is_finite() && y2.is_finite() {
            Some(C64::new(x, y2.sqrt()))
        } else {
            None
        }
    }
}

fn nonzero(gamma: &[f64]) -> bool {
    gamma.iter().any(|&v| v != 0.0)
}

fn real_jacobian_sign(a: C64, b: C64) -> i32 {
    let det = a.norm_sqr() - b.norm_sqr();
    if det > 0.0 {
        1
    } else if det < 0.0 {
        -1
    } else {
        0
    }
}

/// Outcome of a single flow, before it is attached to a source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowResult {
    pub location: C64,
    pub value: f64,
    pub gradient_norm: f64,
    pub sign: i32,
    pub converged: bool,
    pub iterations: usize,
}

/// Gradient flow of the normalized `|Z|²`, finished by Newton on `D_z Z = 0`.
///
/// Returns `None` when the flow leaves the admissible domain or drives `Z`
/// to zero. Hitting the iteration cap gives a result with `converged = false`.
pub fn attractor_flow(m: &PeriodModel, gamma: &[f64], start: C64) -> Result<Option<FlowResult>> {
    attractor_flow_traced(m, gamma, start, None)
}

/// [`attractor_flow`] that also records the objective after every accepted step.
pub fn attractor_flow_traced(
    m: &PeriodModel,
    gamma: &[f64],
    start: C64,
    trace: Option<&mut Vec<f64>>,
) -> Result<Option<FlowResult>> {
    if !nonzero(gamma) {
        return Err(Error::InvalidParameter("charge must be nonzero"));
    }
    if !m.is_admissible(start) {
        return Err(Error::Inadmissible);
    }
    let obj = ChargeObjective::new(m, gamma)?;
    Ok(flow(&obj, m, start, trace))
}

fn flow(obj: &ChargeObjective, m: &PeriodModel, start: C64, mut trace: Option<&mut Vec<f64>>) -> Option<FlowResult> {
    let mut z = start;
    let mut jet = obj.jet(z);
    let mut v = jet.value();
    let v_start = v;
    if let Some(t) = trace.as_deref_mut() {
        t.push(v);
    }
    let finish = |z: C64, jet: &Jet, converged: bool, iterations: usize| {
        let (a, b) = jet.dcov_derivatives();
        FlowResult {
            location: z,
            value: jet.value(),
            gradient_norm: jet.gradient_norm(),
            sign: real_jacobian_sign(a, b),
            converged,
            iterations,
        }
    };
    for it in 0..MAX_FLOW_ITERATIONS {
        let gn = jet.gradient_norm();
        if gn <= GRADIENT_TOL * (1.0 + v.sqrt()) {
            return Some(finish(z, &jet, true, it));
        }
        let at_boundary = z.im < 2.0 * DOMAIN_MARGIN;
        if !(v > 1e-24 * v_start) || at_boundary || z.im > ESCAPE || z.re.abs() > ESCAPE {
            return None;
        }
        let f = jet.dcov();
        let mut accepted = false;
        if gn < NEWTON_SWITCH * v.sqrt() {
            let (a, b) = jet.dcov_derivatives();
            let den = a.norm_sqr() - b.norm_sqr();
            let step = (b * f.conj() - f * a.conj()) / den;
            let cand = z + step;
            if den != 0.0 && m.is_admissible(cand) {
                let cj = obj.jet(cand);
                let cv = cj.value();
                if cv <= v * (1.0 + MONOTONE_SLACK) {
                    z = cand;
                    jet = cj;
                    v = cv;
                    accepted = true;
                }
            }
        }
        if !accepted {
            // metric gradient of log V
            let ratio = f / jet.z;
            let dir = -ratio.conj() / jet.metric;
            let slope = 2.0 * ratio.norm_sqr() / jet.metric * v;
            let mut t = 1.0;
            while t > 1e-30 {
                let cand = z + dir * t;
                if m.is_admissible(cand) {
                    let cj = obj.jet(cand);
                    let cv = cj.value();
                    if cv <= v - 1e-4 * t * slope {
                        z = cand;
                        jet = cj;
                        v = cv;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
        }
        if !accepted {
            // stalled at rounding level without meeting the gradient contract
            return Some(finish(z, &jet, false, it));
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(v);
        }
    }
    Some(finish(z, &jet, false, MAX_FLOW_ITERATIONS))
}

/// Options for [`enumerate_attractor_points`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorOptions {
    /// Flows start from the centres of a `start_grid × start_grid` grid over the region.
    pub start_grid: usize,
    /// Skip charges whose closed-form attractor point is clearly outside the
    /// region or above the bound before running any flow.
    pub analytic_screen: bool,
}

impl Default for AttractorOptions {
    fn default() -> Self {
        Self {
            start_grid: DEFAULT_START_GRID,
            analytic_screen: true,
        }
    }
}

/// Per-component bounds `|γ_i| ≤ 2 Z_max max_R |Π_i| / √(e^{−K})_min`.
///
/// At an attractor point `γ = 2 Re(c Π)` with `|c|² e^{−K} = |Z|²_norm`, so
/// every qualifying charge lies inside this box.
pub fn attractor_charge_bounds(m: &PeriodModel, region: Rect, zmax: f64) -> Result<[f64; 4]> {
    ChargeObjective::new(m, &[1.0, 0.0, 0.0, 0.0])?;
    region.validate()?;
    if region.is_empty() {
        return Ok([0.0; 4]);
    }
    let corner = C64::new(region.x0.abs().max(region.x1.abs()), region.y1);
    let p = m.period_vector(corner)?;
    let vmin = m.period_volume(C64::new(0.0, region.y0))?;
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = 2.0 * zmax * p[i].norm() / vmin.sqrt();
    }
    Ok(out)
}

/// The charge box actually scanned, split into slabs of fixed `(γ₀, γ₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorPlan {
    pub model: PeriodModel,
    pub region: Rect,
    pub zmax: f64,
    pub box_size: i64,
    pub options: AttractorOptions,
    /// Effective per-component half-widths `min(B, ⌊bound_i⌋)`.
    pub extent: [i64; 4],
    pub sufficient_box: i64,
}

/// Records and tallies from a range of slabs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanOutput {
    pub records: Vec<CriticalPointRecord>,
    pub flows: u64,
}

impl ScanOutput {
    pub fn extend(&mut self, other: ScanOutput) {
        self.records.extend(other.records);
        self.flows += other.flows;
    }
}

impl AttractorPlan {
    pub fn new(m: &PeriodModel, region: Rect, zmax: f64, box_size: i64, options: AttractorOptions) -> Result<Self> {
        if !(zmax >= 0.0 && zmax.is_finite()) {
            return Err(Error::InvalidParameter("zmax must be finite and nonnegative"));
        }
        if box_size < 1 {
            return Err(Error::InvalidParameter("charge box must be at least 1"));
        }
        if options.start_grid == 0 {
            return Err(Error::InvalidParameter("start grid must be at least 1"));
        }
        let bounds = attractor_charge_bounds(m, region, zmax)?;
        let mut extent = [0i64; 4];
        for i in 0..4 {
            extent[i] = (bounds[i].floor() as i64).min(box_size);
        }
        let sufficient_box = bounds.iter().fold(0.0f64, |a, &b| a.max(b)).floor() as i64;
        Ok(Self {
            model: *m,
            region,
            zmax,
            box_size,
            options,
            extent,
            sufficient_box,
        })
    }

    pub fn slabs(&self) -> u64 {
        ((2 * self.extent[0] + 1) * (2 * self.extent[1] + 1)) as u64
    }

    fn starts(&self) -> Vec<C64> {
        let r = self.region;
        let n = self.options.start_grid;
        let mut v = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = r.x0 + (r.x1 - r.x0) * (i as f64 + 0.5) / n as f64;
                let y = r.y0 + (r.y1 - r.y0) * (j as f64 + 0.5) / n as f64;
                v.push(C64::new(x, y));
            }
        }
        v
    }

    fn screen(&self, obj: &ChargeObjective) -> bool {
        let Some(p) = obj.closed_form_point() else {
            return false;
        };
        let r = self.region;
        let mx = 0.05 * (r.x1 - r.x0) + 1e-9;
        let my = 0.05 * (r.y1 - r.y0) + 1e-9;
        let near = p.re >= r.x0 - mx && p.re <= r.x1 + mx && p.im >= r.y0 - my && p.im <= r.y1 + my;
        near && obj.value(p) <= 1.05 * self.zmax * self.zmax + 1e-12
    }

    /// Scan slabs `range` in order.
    pub fn scan(&self, range: Range<u64>) -> Result<ScanOutput> {
        let mut out = ScanOutput::default();
        if self.region.is_empty() {
            return Ok(out);
        }
        let starts = self.starts();
        let [e0, e1, e2, e3] = self.extent;
        let w1 = (2 * e1 + 1) as u64;
        let bound2 = self.zmax * self.zmax;
        let mut found: Vec<FlowResult> = Vec::new();
        for k in range {
            let g0 = (k / w1) as i64 - e0;
            let g1 = (k % w1) as i64 - e1;
            for g2 in -e2..=e2 {
                for g3 in -e3..=e3 {
                    let gamma = [g0, g1, g2, g3];
                    if gamma == [0; 4] {
                        continue;
                    }
                    let gf = [g0 as f64, g1 as f64, g2 as f64, g3 as f64];
                    let obj = ChargeObjective::new(&self.model, &gf)?;
                    if self.options.analytic_screen && !self.screen(&obj) {
                        continue;
                    }
                    found.clear();
                    for &s in &starts {
                        out.flows += 1;
                        if let Some(r) = flow(&obj, &self.model, s, None) {
                            if found.iter().all(|q| (q.location - r.location).norm() >= DEDUP_RADIUS) {
                                found.push(r);
                            }
                        }
                    }
                    found.sort_by(|a, b| {
                        a.location
                            .re
                            .total_cmp(&b.location.re)
                            .then(a.location.im.total_cmp(&b.location.im))
                    });
                    for r in &found {
                        if !self.region.contains(r.location) {
                            continue;
                        }
                        if r.converged && r.value > bound2 {
                            continue;
                        }
                        out.records.push(CriticalPointRecord {
                            source: Source::Charge(gamma),
                            location: r.location,
                            value: r.value,
                            superpotential: None,
                            length: None,
                            gradient_norm: r.gradient_norm,
                            sign: r.sign,
                            converged: r.converged,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn report(&self, records: &[CriticalPointRecord]) -> Result<CountReport> {
        let mut count = 0u64;
        let mut signed = 0i64;
        let mut inner = 0u64;
        let mut non_converged = 0u64;
        for r in records {
            if !r.converged {
                non_converged += 1;
                continue;
            }
            count += 1;
            signed += r.sign as i64;
            if r.source.max_norm() < self.box_size {
                inner += 1;
            }
        }
        let prediction = attractor_count_prediction(&self.model, self.region, self.zmax)?;
        Ok(CountReport {
            region: self.region,
            control: self.zmax,
            count,
            signed_index: signed,
            prediction,
            ratio: ratio(count as f64, prediction),
            box_size: self.box_size,
            count_box_minus_one: inner,
            sufficient_box: self.sufficient_box,
            non_converged,
        })
    }
}

/// Serial enumeration of attractor points with normalized `|Z| ≤ Z_max` in `region`.
pub fn enumerate_attractor_points(
    m: &PeriodModel,
    region: Rect,
    zmax: f64,
    box_size: i64,
    options: AttractorOptions,
) -> Result<(CountReport, Vec<CriticalPointRecord>)> {
    let plan = AttractorPlan::new(m, region, zmax, box_size, options)?;
    let out = plan.scan(0..plan.slabs())?;
    Ok((plan.report(&out.records)?, out.records))
}

/// `(2^{n+1} / ((n+1) πⁿ)) Z_max^{n+1} vol(R)` as stated for the attractor density.
pub fn attractor_count_prediction(m: &PeriodModel, region: Rect, zmax: f64) -> Result<f64> {
    let n = m.n_moduli() as i32;
    let vol = m.volume(region)?;
    Ok(2f64.powi(n + 1) / ((n + 1) as f64 * PI.powi(n)) * zmax.powi(n + 1) * vol)
}

/// Continuum count `(2π)^{n+1} / ((n+1)! πⁿ) · (Z_max²)^{n+1} · vol(R)`: the
/// volume of the set of real charges whose attractor point lies in `R` with
/// normalized `|Z| ≤ Z_max`.
pub fn attractor_lattice_asymptotic(m: &PeriodModel, region: Rect, zmax: f64) -> Result<f64> {
    let n = m.n_moduli() as i32;
    let vol = m.volume(region)?;
    let fact: f64 = (1..=(n + 1)).map(|k| k as f64).product();
    Ok((2.0 * PI).powi(n + 1) / (fact * PI.powi(n)) * (zmax * zmax).powi(n + 1) * vol)
}

/// Hit counter for the continuum attractor volume, sampling real charges
/// uniformly in the bounding box of [`attractor_charge_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContinuumTally {
    pub hits: u64,
    pub n_samples: u64,
}

impl ContinuumTally {
    pub fn merge(&mut self, o: &ContinuumTally) {
        self.hits += o.hits;
        self.n_samples += o.n_samples;
    }

    /// `(estimate, stderr)` for a sampling box of volume `box_volume`.
    pub fn estimate(&self, box_volume: f64) -> (f64, f64) {
        if self.n_samples == 0 {
            return (0.0, 0.0);
        }
        let n = self.n_samples as f64;
        let p = self.hits as f64 / n;
        (p * box_volume, box_volume * (p * (1.0 - p) / n).sqrt())
    }
}

pub fn continuum_attractor_tally(
    m: &PeriodModel,
    region: Rect,
    zmax: f64,
    seed: u64,
    indices: Range<u64>,
) -> Result<ContinuumTally> {
    let b = attractor_charge_bounds(m, region, zmax)?;
    let mut t = ContinuumTally::default();
    for k in indices {
        t.n_samples += 1;
        let mut r = rng::stream(seed, domain::ATTRACTOR_CONTINUUM, k);
        let mut g = [0.0; 4];
        for i in 0..4 {
            g[i] = b[i] * (2.0 * rng::uniform01(&mut r) - 1.0);
        }
        let obj = ChargeObjective::new(m, &g)?;
        if let Some(p) = obj.closed_form_point() {
            if region.contains(p) && obj.value(p) <= zmax * zmax {
                t.hits += 1;
            }
        }
    }
    Ok(t)
}

/// Volume of the sampling box used by [`continuum_attractor_tally`].
pub fn attractor_box_volume(m: &PeriodModel, region: Rect, zmax: f64) -> Result<f64> {
    Ok(attractor_charge_bounds(m, region, zmax)?.iter().map(|b| 2.0 * b).product())
}

// ---------------------------------------------------------------- flux vacua

/// Closed-form vacuum of the rigid model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidVacuum {
    pub tau: C64,
    pub superpotential: C64,
    /// `fᵀηh` in floating point (exact for integer input of moderate size).
    pub length: f64,
}

/// Solves `D_τ W = 0` for `W = A + τB`.
///
/// `B + (i/2y)(A + τB) = 0` rearranges to `i(A + τ̄ B) = 0`, so `τ* = −Ā/B̄`.
/// With `η = [[0, −1], [1, 0]]` one finds `Im τ* = L / |B|²`, so a vacuum in
/// the upper half plane exists exactly when `L > 0`.
pub fn rigid_vacuum_solve(m: &PeriodModel, f: &[f64; 2], h: &[f64; 2]) -> Result<Option<RigidVacuum>> {
    let (a, b) = m.flux_periods(f, h)?;
    if b.norm_sqr() == 0.0 {
        return Ok(None);
    }
    let tau = -a.conj() / b.conj();
    if !(tau.im > 0.0) || !tau.is_finite() {
        return Ok(None);
    }
    let eta = m.eta_matrix();
    let length = f[0] * (eta[0] as f64 * h[0] + eta[1] as f64 * h[1]) + f[1] * (eta[2] as f64 * h[0] + eta[3] as f64 * h[1]);
    Ok(Some(RigidVacuum {
        tau,
        superpotential: a + tau * b,
        length,
    }))
}

/// Whether every point of `region` lies in `|Re τ| ≤ 1/2, |τ| ≥ 1`.
pub fn in_fundamental_domain(region: Rect) -> bool {
    if region.is_empty() {
        return true;
    }
    if region.x0 < -0.5 || region.x1 > 0.5 {
        return false;
    }
    let xmin = if region.x0 <= 0.0 && region.x1 >= 0.0 {
        0.0
    } else {
        region.x0.abs().min(region.x1.abs())
    };
    xmin * xmin + region.y0 * region.y0 >= 1.0
}

/// Flux box beyond which no vacuum with `τ ∈ R`, `L ≤ L_max` exists:
/// `|h| = |B| = √(L/y)` and `|f| = |A| = |τ||B|`.
pub fn flux_sufficient_box(region: Rect, lmax: i64) -> i64 {
    if region.is_empty() || lmax <= 0 {
        return 0;
    }
    let b = (lmax as f64 / region.y0).sqrt();
    let tmax = (region.x0.abs().max(region.x1.abs()).powi(2) + region.y1 * region.y1).sqrt();
    (b * tmax.max(1.0)).floor() as i64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPlan {
    pub model: PeriodModel,
    pub region: Rect,
    pub lmax: i64,
    pub box_size: i64,
}

impl FluxPlan {
    pub fn new(m: &PeriodModel, region: Rect, lmax: i64, box_size: i64) -> Result<Self> {
        if !matches!(m.kind(), ModelKind::RigidFlux) {
            return Err(Error::Unsupported("flux enumeration is implemented for the rigid model"));
        }
        region.validate()?;
        if !in_fundamental_domain(region) {
            return Err(Error::OutsideFundamentalDomain);
        }
        if lmax < 1 {
            return Err(Error::InvalidParameter("lmax must be at least 1"));
        }
        if box_size < 1 {
            return Err(Error::InvalidParameter("flux box must be at least 1"));
        }
        Ok(Self {
            model: *m,
            region,
            lmax,
            box_size,
        })
    }

    /// One slab per value of `f₀`.
    pub fn slabs(&self) -> u64 {
        (2 * self.box_size + 1) as u64
    }

    pub fn scan(&self, range: Range<u64>) -> Result<ScanOutput> {
        let mut out = ScanOutput::default();
        if self.region.is_empty() {
            return Ok(out);
        }
        let b = self.box_size;
        let eta = self.model.eta_matrix();
        for k in range {
            let f0 = k as i64 - b;
            for f1 in -b..=b {
                for h0 in -b..=b {
                    for h1 in -b..=b {
                        let fl = FluxVector { f: [f0, f1], h: [h0, h1] };
                        let l = flux_length(&fl.f, &fl.h, &eta);
                        if l <= 0 || l > self.lmax {
                            continue;
                        }
                        let (f, h) = fl.as_f64();
                        let Some(v) = rigid_vacuum_solve(&self.model, &f, &h)? else {
                            continue;
                        };
                        if !self.region.contains(v.tau) {
                            continue;
                        }
                        out.records.push(self.record(fl, l, v)?);
                    }
                }
            }
        }
        Ok(out)
    }

    fn record(&self, fl: FluxVector, l: i64, v: RigidVacuum) -> Result<CriticalPointRecord> {
        let m = &self.model;
        let (f, h) = fl.as_f64();
        let d = m.flux_covariant_derivative(&f, &h, v.tau)?;
        let ek = (-m.kahler_potential(v.tau)?).exp();
        let g = m.metric(v.tau)?;
        let w = v.superpotential;
        let gradient_norm = d.norm() / (ek * g).sqrt();
        Ok(CriticalPointRecord {
            source: Source::Flux(fl),
            location: v.tau,
            value: w.norm_sqr() / ek,
            superpotential: Some(w),
            length: Some(l),
            gradient_norm,
            sign: m.flux_morse_sign(&f, &h, v.tau)?,
            converged: gradient_norm <= GRADIENT_TOL * (1.0 + (w.norm_sqr() / ek).sqrt()),
        })
    }

    pub fn report(&self, records: &[CriticalPointRecord]) -> Result<CountReport> {
        let mut count = 0u64;
        let mut signed = 0i64;
        let mut inner = 0u64;
        let mut non_converged = 0u64;
        for r in records {
            if !r.converged {
                non_converged += 1;
                continue;
            }
            count += 1;
            signed += r.sign as i64;
            if r.source.max_norm() < self.box_size {
                inner += 1;
            }
        }
        let prediction = flux_index_prediction(&self.model, self.region, self.lmax as f64)?;
        Ok(CountReport {
            region: self.region,
            control: self.lmax as f64,
            count,
            signed_index: signed,
            prediction,
            ratio: ratio(signed as f64, prediction),
            box_size: self.box_size,
            count_box_minus_one: inner,
            sufficient_box: flux_sufficient_box(self.region, self.lmax),
            non_converged,
        })
    }
}

/// Serial enumeration of rigid flux vacua with `τ ∈ R` and `0 < L ≤ L_max`.
pub fn enumerate_flux_vacua(
    m: &PeriodModel,
    region: Rect,
    lmax: i64,
    box_size: i64,
) -> Result<(CountReport, Vec<CriticalPointRecord>)> {
    let plan = FluxPlan::new(m, region, lmax, box_size)?;
    let out = plan.scan(0..plan.slabs())?;
    Ok((plan.report(&out.records)?, out.records))
}

/// `((2π L_max)^{b3} / (π^{n+1} b3!)) ∫_R det(𝓡 + ω)`.
pub fn flux_index_prediction(m: &PeriodModel, region: Rect, lmax: f64) -> Result<f64> {
    let b3 = m.b3() as i32;
    let n1 = m.n_moduli() as i32;
    let fact: f64 = (1..=b3).map(|k| k as f64).product();
    let integral = m.curvature_integral(region)?;
    Ok((2.0 * PI * lmax).powi(b3) / (PI.powi(n1) * fact) * integral)
}

/// Monte Carlo hit counter for the continuum flux volume.
pub fn continuum_flux_tally(
    m: &PeriodModel,
    region: Rect,
    lmax: f64,
    box_radius: f64,
    seed: u64,
    indices: Range<u64>,
) -> Result<ContinuumTally> {
    if !(box_radius > 0.0) {
        return Err(Error::InvalidParameter("box radius must be positive"));
    }
    let mut t = ContinuumTally::default();
    for k in indices {
        t.n_samples += 1;
        if region.is_empty() {
            continue;
        }
        let mut r = rng::stream(seed, domain::FLUX_CONTINUUM, k);
        let mut u = [0.0; 4];
        for v in u.iter_mut() {
            *v = box_radius * (2.0 * rng::uniform01(&mut r) - 1.0);
        }
        if let Some(v) = rigid_vacuum_solve(m, &[u[0], u[1]], &[u[2], u[3]])? {
            if v.length > 0.0 && v.length <= lmax && region.contains(v.tau) {
                t.hits += 1;
            }
        }
    }
    Ok(t)
}

/// Continuum flux estimate with its containment diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub box_radius: f64,
    /// Radius beyond which no qualifying flux exists.
    pub required_radius: f64,
    pub hits: u64,
    pub n_samples: u64,
}

impl ContinuumEstimate {
    pub fn contained(&self) -> bool {
        self.box_radius >= self.required_radius
    }
}

/// Radius `√(L_max / y₀) · max|τ|` that contains every qualifying real flux.
pub fn flux_required_radius(region: Rect, lmax: f64) -> f64 {
    if region.is_empty() {
        return 0.0;
    }
    let tmax = (region.x0.abs().max(region.x1.abs()).powi(2) + region.y1 * region.y1).sqrt();
    (lmax / region.y0).sqrt() * tmax.max(1.0)
}

pub fn finish_continuum_flux(t: &ContinuumTally, region: Rect, lmax: f64, box_radius: f64) -> ContinuumEstimate {
    let (estimate, stderr) = t.estimate((2.0 * box_radius).powi(4));
    ContinuumEstimate {
        estimate,
        stderr,
        box_radius,
        required_radius: flux_required_radius(region, lmax),
        hits: t.hits,
        n_samples: t.n_samples,
    }
}

/// Serial continuum estimate over samples `0..n_samples`.
pub fn continuum_flux_count(
    m: &PeriodModel,
    region: Rect,
    lmax: f64,
    n_samples: u64,
    seed: u64,
    box_radius: f64,
) -> Result<ContinuumEstimate> {
    let t = continuum_flux_tally(m, region, lmax, box_radius, seed, 0..n_samples)?;
    Ok(finish_continuum_flux(&t, region, lmax, box_radius))
}

/// Lower-range uniformity summary of `e^K |W|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct W2Statistics {
    /// 25th percentile; the histogram and KS test use values in `[0, q]`.
    pub q: f64,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_lower: usize,
    pub ks_distance: f64,
    pub ks_pvalue: f64,
}

pub const W2_MIN_RECORDS: usize = 100;

pub fn w2_statistics(values: &[f64], bins: usize) -> Result<W2Statistics> {
    if values.len() < W2_MIN_RECORDS {
        return Err(Error::TooFewRecords {
            needed: W2_MIN_RECORDS,
            got: values.len(),
        });
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one histogram bin"));
    }
    let q = stats::quantile(values, 0.25).ok_or(Error::TooFewRecords {
        needed: W2_MIN_RECORDS,
        got: 0,
    })?;
    if !(q > 0.0) {
        return Err(Error::InvalidParameter("lower quartile of |W|^2 must be positive"));
    }
    let lower: Vec<f64> = values.iter().copied().filter(|&v| v <= q).collect();
    let mut counts = alloc::vec![0u64; bins];
    for &v in &lower {
        let k = ((v / q) * bins as f64) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let bin_edges = (0..=bins).map(|k| q * k as f64 / bins as f64).collect();
    let ks_distance = stats::ks_distance(&lower, |x| (x / q).clamp(0.0, 1.0));
    Ok(W2Statistics {
        q,
        bin_edges,
        counts,
        n_lower: lower.len(),
        ks_distance,
        ks_pvalue: stats::ks_pvalue(ks_distance, lower.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: C64 = C64 { re: 0.0, im: 1.0 };

    fn cubic6() -> PeriodModel {
        PeriodModel::cubic(6.0).unwrap()
    }

    fn attractor_region() -> Rect {
        Rect::new(-0.4, 0.4, 0.8, 1.6).unwrap()
    }

    fn flux_region() -> Rect {
        Rect::new(-0.4, 0.4, 1.0, 2.0).unwrap()
    }

    #[test]
    fn charge_objective_matches_model() {
        let m = cubic6();
        let q = [1.0, -2.0, 3.0, 1.0];
        let o = ChargeObjective::new(&m, &q).unwrap();
        for z in [C64::new(0.3, 1.1), C64::new(-1.2, 0.4)] {
            let j = o.jet(z);
            assert!((j.z - m.central_charge(&q, z).unwrap()).norm() < 1e-12);
            assert!((j.value() - m.normalized_z2(&q, z).unwrap()).abs() < 1e-12 * j.value());
            assert!((j.dcov() - m.covariant_derivative(&q, z).unwrap()).norm() < 1e-12);
            assert!((j.gradient_norm() - m.gradient_norm(&q, z).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_points_are_critical() {
        let m = cubic6();
        let mut seen = 0;
        for g0 in -2..=2 {
            for g1 in -2..=2 {
                for g2 in -3..=3 {
                    for g3 in -3..=3 {
                        let q = [g0 as f64, g1 as f64, g2 as f64, g3 as f64];
                        if !nonzero(&q) {
                            continue;
                        }
                        let o = ChargeObjective::new(&m, &q).unwrap();
                        if let Some(p) = o.closed_form_point() {
                            seen += 1;
                            let d = m.covariant_derivative(&q, p).unwrap();
                            let scale = m.central_charge(&q, p).unwrap().norm() / p.im + 1.0;
                            assert!(d.norm() < 1e-10 * scale, "{q:?} {p}");
                        }
                    }
                }
            }
        }
        assert!(seen > 100);
    }

    #[test]
    fn flow_from_critical_point_is_stationary() {
        let m = cubic6();
        let q = [1.0, 0.0, 1.0, 0.0];
        let p = ChargeObjective::new(&m, &q).unwrap().closed_form_point().unwrap();
        assert!((p - C64::new(0.0, (1.0f64 / 3.0).sqrt())).norm() < 1e-15);
        let r = attractor_flow(&m, &q, p).unwrap().unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 1);
        assert!((r.location - p).norm() < 1e-12);
    }

    /// Grid-search minimisation with repeated zooming; uses only function values.
    fn grid_search(m: &PeriodModel, q: &[f64], region: Rect) -> C64 {
        let (mut x0, mut x1, mut y0, mut y1) = (region.x0, region.x1, region.y0, region.y1);
        let mut best = C64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        for _ in 0..12 {
            let n = 40;
            let mut bv = f64::INFINITY;
            for i in 0..=n {
                for j in 0..=n {
                    let z = C64::new(x0 + (x1 - x0) * i as f64 / n as f64, y0 + (y1 - y0) * j as f64 / n as f64);
                    if let Ok(v) = m.normalized_z2(q, z) {
                        if v < bv {
                            bv = v;
                            best = z;
                        }
                    }
                }
            }
            let (hx, hy) = ((x1 - x0) / 8.0, (y1 - y0) / 8.0);
            x0 = best.re - hx;
            x1 = best.re + hx;
            y0 = (best.im - hy).max(1e-3);
            y1 = best.im + hy;
        }
        best
    }

    #[test]
    fn flow_matches_grid_search() {
        let m = cubic6();
        let q = [1.0, 1.0, 2.0, -1.0];
        let region = Rect::new(-2.0, 2.0, 0.2, 3.0).unwrap();
        let oracle = grid_search(&m, &q, region);
        let r = attractor_flow(&m, &q, C64::new(1.0, 2.0)).unwrap().unwrap();
        assert!(r.converged);
        assert!((r.location - oracle).norm() < 1e-6, "{} vs {}", r.location, oracle);
        assert_eq!(r.sign, -1);
    }

    #[test]
    fn flow_is_monotone() {
        let m = cubic6();
        let mut rng = rng::stream(3, 99, 0);
        for _ in 0..100 {
            let mut q = [0.0; 4];
            for v in q.iter_mut() {
                *v = (rng::uniform01(&mut rng) * 9.0).floor() - 4.0;
            }
            if !nonzero(&q) {
                continue;
            }
            let s = C64::new(4.0 * rng::uniform01(&mut rng) - 2.0, 0.1 + 3.0 * rng::uniform01(&mut rng));
            let mut trace = Vec::new();
            attractor_flow_traced(&m, &q, s, Some(&mut trace)).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + MONOTONE_SLACK), "{q:?} {s}");
            }
        }
    }

    #[test]
    fn flow_agrees_with_closed_form() {
        let m = cubic6();
        let mut rng = rng::stream(5, 99, 0);
        for _ in 0..200 {
            let mut q = [0.0; 4];
            for v in q.iter_mut() {
                *v = (rng::uniform01(&mut rng) * 11.0).floor() - 5.0;
            }
            if q[0] == 0.0 && q[1] == 0.0 {
                continue;
            }
            let o = ChargeObjective::new(&m, &q).unwrap();
            let s = C64::new(0.0, 1.2);
            let r = attractor_flow(&m, &q, s).unwrap();
            match (o.closed_form_point(), r) {
                (Some(p), Some(r)) => {
                    assert!(r.converged);
                    assert!((p - r.location).norm() < 1e-7 * (1.0 + p.norm()), "{q:?}: {p} vs {}", r.location);
                }
                (None, None) => {}
                (p, r) => panic!("{q:?}: closed form {p:?}, flow {r:?}"),
            }
        }
    }

    #[test]
    fn flow_rejects_bad_input() {
        let m = cubic6();
        assert!(attractor_flow(&m, &[0.0; 4], I).is_err());
        assert!(attractor_flow(&m, &[1.0, 0.0, 0.0, 0.0], -I).is_err());
        assert!(attractor_flow(&PeriodModel::rigid(), &[1.0, 0.0], I).is_err());
        // γ₀ = γ₁ = 0: |Z|² decays at large Im z and the flow escapes
        assert_eq!(attractor_flow(&m, &[0.0, 0.0, 1.0, 1.0], I).unwrap(), None);
    }

    #[test]
    fn hessian_is_trivial_at_attractors() {
        let m = cubic6();
        for q in [[1.0, 0.0, 1.0, 0.0], [1.0, 1.0, 2.0, -1.0], [1.0, -1.0, 4.0, 1.0], [0.0, 1.0, 1.0, 0.0]] {
            let p = ChargeObjective::new(&m, &q).unwrap().closed_form_point().unwrap();
            let r = attractor_flow(&m, &q, p + C64::new(0.1, 0.1)).unwrap().unwrap();
            let h = m.hessian(&q, r.location).unwrap();
            let det = h.det_normalized();
            assert!((det.re - r.value).abs() < 1e-6 * r.value && det.im.abs() < 1e-6 * r.value);
            assert!(m.identity_residual(&q, r.location).unwrap() < 1e-8);
        }
    }

    #[test]
    fn prediction_formulas() {
        let m = cubic6();
        let r = attractor_region();
        let vol = m.volume(r).unwrap();
        let p = attractor_count_prediction(&m, r, 3.0).unwrap();
        assert!((p - 2.0 / PI * 9.0 * vol).abs() < 1e-12 * p);
        let p2 = attractor_count_prediction(&m, r, 6.0).unwrap();
        assert!((p2 / p - 4.0).abs() < 1e-12);
        let empty = Rect::new(0.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(attractor_count_prediction(&m, empty, 3.0).unwrap(), 0.0);
        let a = attractor_lattice_asymptotic(&m, r, 2.0).unwrap();
        assert!((a - 2.0 * PI * 16.0 * vol).abs() < 1e-12 * a);
    }

    #[test]
    fn continuum_attractor_volume_matches_asymptotic() {
        let m = cubic6();
        let r = attractor_region();
        let z = 1.0;
        let t = continuum_attractor_tally(&m, r, z, 8, 0..400_000).unwrap();
        let (est, se) = t.estimate(attractor_box_volume(&m, r, z).unwrap());
        let want = attractor_lattice_asymptotic(&m, r, z).unwrap();
        assert!((est - want).abs() < 4.0 * se, "{est} ± {se} vs {want}");
    }

    #[test]
    fn attractor_enumeration_small() {
        let m = cubic6();
        let r = attractor_region();
        let (rep, recs) = enumerate_attractor_points(&m, r, 1.5, 20, AttractorOptions::default()).unwrap();
        assert!(rep.count > 0);
        assert_eq!(rep.count % 2, 0);
        assert_eq!(rep.signed_index, -(rep.count as i64));
        assert_eq!(rep.non_converged, 0);
        assert!(rep.box_complete());
        for rec in &recs {
            let Source::Charge(g) = rec.source else { panic!() };
            let q = g.map(|v| v as f64);
            assert!(rec.value <= 1.5 * 1.5 && r.contains(rec.location));
            assert!(m.gradient_norm(&q, rec.location).unwrap() <= GRADIENT_TOL * (1.0 + rec.value.sqrt()));
            let neg = g.map(|v| -v);
            assert!(recs.iter().any(|o| o.source == Source::Charge(neg) && (o.location - rec.location).norm() < 1e-9));
        }
        // without the closed-form screen, and with a finer start grid
        let unscreened = AttractorOptions {
            start_grid: 6,
            analytic_screen: false,
        };
        let (rep2, _) = enumerate_attractor_points(&m, r, 1.5, 20, unscreened).unwrap();
        assert_eq!(rep.count, rep2.count);
        let (zero, _) = enumerate_attractor_points(&m, r, 0.0, 5, AttractorOptions::default()).unwrap();
        assert_eq!(zero.count, 0);
    }

    #[test]
    fn attractor_slabs_concatenate() {
        let m = cubic6();
        let plan = AttractorPlan::new(&m, attractor_region(), 1.5, 20, AttractorOptions::default()).unwrap();
        let whole = plan.scan(0..plan.slabs()).unwrap();
        let mut parts = ScanOutput::default();
        let mid = plan.slabs() / 3;
        parts.extend(plan.scan(0..mid).unwrap());
        parts.extend(plan.scan(mid..plan.slabs()).unwrap());
        assert_eq!(whole, parts);
    }

    #[test]
    fn rigid_vacua_closed_form() {
        let m = PeriodModel::rigid();
        assert_eq!(rigid_vacuum_solve(&m, &[1.0, 2.0], &[0.0, 0.0]).unwrap(), None);
        // L = f1 h0 − f0 h1 = 1 for f = (0,1), h = (1,0)
        let v = rigid_vacuum_solve(&m, &[0.0, 1.0], &[1.0, 0.0]).unwrap().unwrap();
        assert_eq!(v.length, 1.0);
        assert!((v.tau - I).norm() < 1e-15);
        assert_eq!(rigid_vacuum_solve(&m, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), None);
        for (f, h) in [([2.0, 5.0], [3.0, -1.0]), ([-4.0, 1.0], [-2.0, -3.0]), ([7.0, 3.0], [1.0, 1.0])] {
            if let Some(v) = rigid_vacuum_solve(&m, &f, &h).unwrap() {
                let w = m.superpotential(&f, &h, v.tau).unwrap();
                let d = m.flux_covariant_derivative(&f, &h, v.tau).unwrap();
                assert!(d.norm() <= 1e-12 * (1.0 + w.norm()));
                assert!(v.length > 0.0);
                // e^K |W|² = 2L
                let ek = (-m.kahler_potential(v.tau).unwrap()).exp();
                assert!((w.norm_sqr() / ek - 2.0 * v.length).abs() < 1e-12 * v.length);
            }
        }
    }

    #[test]
    fn rigid_vacuum_matches_newton_oracle() {
        let m = PeriodModel::rigid();
        let (f, h) = ([0.0, 1.0], [1.0, 0.0]);
        let dw = |t: C64| m.flux_covariant_derivative(&f, &h, t).unwrap();
        let mut t = C64::new(0.3, 0.7);
        for _ in 0..50 {
            let e = 1e-7;
            let f0 = dw(t);
            let fx = (dw(t + e) - f0) / e;
            let fy = (dw(t + I * e) - f0) / e;
            // [fx.re fy.re; fx.im fy.im] δ = −f0
            let det = fx.re * fy.im - fy.re * fx.im;
            let dx = (-f0.re * fy.im + fy.re * f0.im) / det;
            let dy = (-fx.re * f0.im + f0.re * fx.im) / det;
            t += C64::new(dx, dy);
        }
        let v = rigid_vacuum_solve(&m, &f, &h).unwrap().unwrap();
        assert!((v.tau - t).norm() < 1e-10);
    }

    #[test]
    fn fundamental_domain_check() {
        assert!(in_fundamental_domain(flux_region()));
        assert!(!in_fundamental_domain(Rect::new(-0.6, 0.4, 1.0, 2.0).unwrap()));
        assert!(!in_fundamental_domain(Rect::new(-0.4, 0.4, 0.9, 2.0).unwrap()));
        assert!(in_fundamental_domain(Rect::new(0.3, 0.5, 0.96, 2.0).unwrap()));
        assert_eq!(enumerate_flux_vacua(&PeriodModel::rigid(), Rect::new(-0.6, 0.4, 1.0, 2.0).unwrap(), 5, 5).unwrap_err(), Error::OutsideFundamentalDomain);
    }

    #[test]
    fn flux_enumeration_small() {
        let m = PeriodModel::rigid();
        let r = flux_region();
        let (rep, recs) = enumerate_flux_vacua(&m, r, 20, 12).unwrap();
        assert!(rep.count > 0);
        assert_eq!(rep.signed_index, -(rep.count as i64));
        assert!(rep.box_complete());
        let (rep2, _) = enumerate_flux_vacua(&m, r, 20, 14).unwrap();
        assert_eq!(rep.count, rep2.count);
        let (smaller, _) = enumerate_flux_vacua(&m, r, 10, 12).unwrap();
        assert!(smaller.count <= rep.count);
        for rec in &recs {
            assert!(rec.converged);
            assert!((rec.value - 2.0 * rec.length.unwrap() as f64).abs() < 1e-9);
        }
        // superpotential convention F = f − τh: count over the same box
        let eta = m.eta_matrix();
        let mut flipped = 0;
        for f0 in -12i64..=12 {
            for f1 in -12i64..=12 {
                for h0 in -12i64..=12 {
                    for h1 in -12i64..=12 {
                        let (f, h) = ([f0, f1], [-h0, -h1]);
                        let l = flux_length(&f, &h, &eta);
                        if l <= 0 || l > 20 {
                            continue;
                        }
                        let v = rigid_vacuum_solve(&m, &f.map(|x| x as f64), &h.map(|x| x as f64)).unwrap();
                        if v.is_some_and(|v| r.contains(v.tau)) {
                            flipped += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(flipped, recs.len());
    }

    #[test]
    fn flux_prediction_scaling() {
        let m = PeriodModel::rigid();
        let r = flux_region();
        let p = flux_index_prediction(&m, r, 10.0).unwrap();
        let p2 = flux_index_prediction(&m, r, 20.0).unwrap();
        assert!((p2 / p - 4.0).abs() < 1e-9);
        assert!((p + PI / 2.0 * 100.0 * 0.4).abs() < 1e-6 * p.abs());
        assert_eq!(flux_index_prediction(&m, Rect::new(0.0, 0.0, 1.0, 2.0).unwrap(), 10.0).unwrap(), 0.0);
    }

    #[test]
    fn continuum_flux_basics() {
        let m = PeriodModel::rigid();
        let r = flux_region();
        let empty = Rect::new(0.0, 0.0, 1.0, 2.0).unwrap();
        let e = continuum_flux_count(&m, empty, 50.0, 1000, 1, 10.0).unwrap();
        assert_eq!((e.estimate, e.stderr), (0.0, 0.0));
        let rad = flux_required_radius(r, 50.0);
        let e = continuum_flux_count(&m, r, 50.0, 200_000, 1, rad).unwrap();
        assert!(e.contained());
        let want = PI / 2.0 * 2500.0 * 0.4;
        assert!((e.estimate - want).abs() < 4.0 * e.stderr, "{} ± {} vs {want}", e.estimate, e.stderr);
    }

    #[test]
    fn w2_statistics_calibration() {
        let vals: Vec<f64> = (0..4000).map(|k| (k as f64 + 0.5) / 4000.0).collect();
        let s = w2_statistics(&vals, 10).unwrap();
        assert!(s.ks_distance < 1.36 / (s.n_lower as f64).sqrt());
        assert_eq!(s.counts.iter().sum::<u64>() as usize, s.n_lower);
        assert!(w2_statistics(&vals[..50], 10).is_err());
    }
}
