//! Parallel versions of the core loops.
//!
//! Work is cut into fixed-size chunks that do not depend on the thread count,
//! each chunk is reduced on its own, and the partial results are merged in
//! chunk order. Floating-point sums therefore come out bit-identical for any
//! number of threads.

use std::ops::Range;

use randcrit_core::ensembles::EnsembleSpec;
use randcrit_core::grid::{DensityGrid, GridSpec};
use randcrit_core::kacrice::{self, PlaneRegion};
use randcrit_core::montecarlo::{EmpiricalDensity, RealRootTally, RegionTally, ZeroHistogram, REAL_ROOT_TOL};
use randcrit_core::special_geometry::{PeriodModel, Rect};
use randcrit_core::vacua::{
    self, AttractorOptions, AttractorPlan, ContinuumEstimate, ContinuumTally, CountReport, CriticalPointRecord,
    FluxPlan, ScanOutput,
};
use randcrit_core::Result;
use rayon::prelude::*;

/// Samples per work item for Monte Carlo loops.
pub const CHUNK: u64 = 512;

pub fn chunks(n: u64, size: u64) -> Vec<Range<u64>> {
    (0..n.div_ceil(size)).map(|k| k * size..((k + 1) * size).min(n)).collect()
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    pool.install(f)
}

/// Maps every chunk in parallel and folds the results left to right.
fn map_merge<T, M, F>(ranges: Vec<Range<u64>>, init: T, map: M, mut merge: F) -> Result<T>
where
    T: Send,
    M: Fn(Range<u64>) -> Result<T> + Sync + Send,
    F: FnMut(&mut T, T),
{
    let parts = ranges.into_par_iter().map(map).collect::<Result<Vec<T>>>()?;
    let mut acc = init;
    for p in parts {
        merge(&mut acc, p);
    }
    Ok(acc)
}

pub fn density_grid(e: &EnsembleSpec, spec: GridSpec) -> Result<DensityGrid> {
    spec.validate()?;
    let values = (0..spec.cells())
        .into_par_iter()
        .map(|k| kacrice::complex_zero_density(e, spec.cell_center(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid { spec, values })
}

pub fn cell_masses(e: &EnsembleSpec, spec: GridSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    (0..spec.cells())
        .into_par_iter()
        .map(|k| {
            let ((x0, x1), (y0, y1)) = spec.cell_bounds(k);
            kacrice::region_mass(e, PlaneRegion::Rectangle { x0, x1, y0, y1 })
        })
        .collect()
}

pub fn zero_histogram(e: &EnsembleSpec, spec: GridSpec, n_samples: u64, seed: u64) -> Result<EmpiricalDensity> {
    let h = map_merge(
        chunks(n_samples, CHUNK),
        ZeroHistogram::new(spec)?,
        |r| {
            let mut h = ZeroHistogram::new(spec)?;
            h.accumulate(e, seed, r)?;
            Ok(h)
        },
        |acc, h| acc.merge(&h).expect("same grid"),
    )?;
    Ok(h.finish())
}

pub fn region_tally(e: &EnsembleSpec, region: PlaneRegion, n_samples: u64, seed: u64) -> Result<RegionTally> {
    map_merge(
        chunks(n_samples, CHUNK),
        RegionTally::default(),
        |r| {
            let mut t = RegionTally::default();
            t.accumulate(e, region, seed, r)?;
            Ok(t)
        },
        |acc, t| acc.merge(&t),
    )
}

pub fn real_root_tally(degree: usize, n_samples: u64, seed: u64) -> Result<RealRootTally> {
    map_merge(
        chunks(n_samples, CHUNK),
        RealRootTally::default(),
        |r| {
            let mut t = RealRootTally::default();
            t.accumulate(degree, seed, r, 1.0, REAL_ROOT_TOL)?;
            Ok(t)
        },
        |acc, t| acc.merge(&t),
    )
}

/// One slab per work item.
fn scan_slabs<S>(slabs: u64, scan: S) -> Result<ScanOutput>
where
    S: Fn(Range<u64>) -> Result<ScanOutput> + Sync + Send,
{
    map_merge(chunks(slabs, 1), ScanOutput::default(), scan, |acc, o| acc.extend(o))
}

pub fn attractor_points(
    m: &PeriodModel,
    region: Rect,
    zmax: f64,
    box_size: i64,
    options: AttractorOptions,
) -> Result<(CountReport, Vec<CriticalPointRecord>)> {
    let plan = AttractorPlan::new(m, region, zmax, box_size, options)?;
    let out = scan_slabs(plan.slabs(), |r| plan.scan(r))?;
    Ok((plan.report(&out.records)?, out.records))
}

pub fn flux_vacua(m: &PeriodModel, region: Rect, lmax: i64, box_size: i64) -> Result<(CountReport, Vec<CriticalPointRecord>)> {
    let plan = FluxPlan::new(m, region, lmax, box_size)?;
    let out = scan_slabs(plan.slabs(), |r| plan.scan(r))?;
    Ok((plan.report(&out.records)?, out.records))
}

pub fn continuum_flux(
    m: &PeriodModel,
    region: Rect,
    lmax: f64,
    n_samples: u64,
    seed: u64,
    box_radius: f64,
) -> Result<ContinuumEstimate> {
    let t = map_merge(
        chunks(n_samples, CHUNK),
        ContinuumTally::default(),
        |r| vacua::continuum_flux_tally(m, region, lmax, box_radius, seed, r),
        |acc, t| acc.merge(&t),
    )?;
    Ok(vacua::finish_continuum_flux(&t, region, lmax, box_radius))
}

/// `(estimate, stderr)` of the continuum attractor volume.
pub fn continuum_attractors(m: &PeriodModel, region: Rect, zmax: f64, n_samples: u64, seed: u64) -> Result<(f64, f64)> {
    let t = map_merge(
        chunks(n_samples, CHUNK),
        ContinuumTally::default(),
        |r| vacua::continuum_attractor_tally(m, region, zmax, seed, r),
        |acc, t| acc.merge(&t),
    )?;
    Ok(t.estimate(vacua::attractor_box_volume(m, region, zmax)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use randcrit_core::ensembles::EnsembleKind;
    use randcrit_core::montecarlo;

    #[test]
    fn chunks_cover_range() {
        assert_eq!(chunks(0, 4), Vec::<Range<u64>>::new());
        assert_eq!(chunks(10, 4), vec![0..4, 4..8, 8..10]);
    }

    #[test]
    fn histogram_matches_serial_for_any_thread_count() {
        let e = EnsembleSpec::new(EnsembleKind::Kostlan, 6).unwrap();
        let g = GridSpec::square(-2.0, 2.0, 5).unwrap();
        let serial = montecarlo::empirical_zero_density(&e, 1300, g, 3).unwrap();
        for t in [1, 3, 8] {
            let par = with_threads(Some(t), || zero_histogram(&e, g, 1300, 3)).unwrap();
            assert_eq!(par.counts, serial.counts);
            assert_eq!(par.overflow, serial.overflow);
            // bitwise: same chunking regardless of threads
            let again = with_threads(Some(1), || zero_histogram(&e, g, 1300, 3)).unwrap();
            assert_eq!(par.stderr, again.stderr);
        }
    }

    #[test]
    fn flux_scan_matches_serial() {
        let m = PeriodModel::rigid();
        let r = Rect::new(-0.4, 0.4, 1.0, 2.0).unwrap();
        let (rep, recs) = with_threads(Some(4), || flux_vacua(&m, r, 20, 8)).unwrap();
        let (srep, srecs) = vacua::enumerate_flux_vacua(&m, r, 20, 8).unwrap();
        assert_eq!(rep, srep);
        assert_eq!(recs, srecs);
    }
}
