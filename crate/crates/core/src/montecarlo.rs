//! Sampling ensembles, locating all roots, and tallying where they land.
//!
//! Accumulators work on a half-open range of sample indices and can be merged,
//! so a caller may split `0..n` into shards in any way and merge them back in
//! index order to get bit-identical results.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::ops::Range;

use crate::ensembles::EnsembleSpec;
use crate::grid::GridSpec;
use crate::kacrice::PlaneRegion;
use crate::rng::{self, domain};
use crate::roots::{self, RootSet, RESIDUAL_REL};
use crate::{Error, Result, C64};

/// Default `|Im r| ≤ tol·(1 + |r|)` test for calling a root real.
pub const REAL_ROOT_TOL: f64 = 1e-8;

fn max_abs(c: &[C64]) -> f64 {
    c.iter().fold(0.0f64, |a, x| a.max(x.norm()))
}

/// Roots of one sample together with whether the residual contract held.
pub fn sample_roots(e: &EnsembleSpec, seed: u64, index: u64) -> Result<(RootSet, bool)> {
    let s = e.sample(seed, index);
    let rs = roots::find_roots(&s.coefficients)?;
    let ok = rs.max_residual() <= RESIDUAL_REL * (1.0 + max_abs(&s.coefficients));
    Ok((rs, ok))
}

/// Running per-cell root counts over a range of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroHistogram {
    pub spec: GridSpec,
    pub counts: Vec<u64>,
    /// Σ over samples of (roots of that sample in the cell)².
    pub sum_sq: Vec<u64>,
    pub overflow: u64,
    pub n_samples: u64,
    pub residual_violations: u64,
}

impl ZeroHistogram {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            counts: alloc::vec![0; spec.cells()],
            sum_sq: alloc::vec![0; spec.cells()],
            overflow: 0,
            n_samples: 0,
            residual_violations: 0,
        })
    }

    pub fn accumulate(&mut self, e: &EnsembleSpec, seed: u64, indices: Range<u64>) -> Result<()> {
        let mut per_sample: Vec<(usize, u64)> = Vec::new();
        for k in indices {
            let (rs, ok) = sample_roots(e, seed, k)?;
            if !ok {
                self.residual_violations += 1;
            }
            per_sample.clear();
            for &z in &rs.roots {
                match self.spec.locate(z) {
                    Some(cell) => match per_sample.iter_mut().find(|(c, _)| *c == cell) {
                        Some(entry) => entry.1 += 1,
                        None => per_sample.push((cell, 1)),
                    },
                    None => self.overflow += 1,
                }
            }
            for &(cell, n) in &per_sample {
                self.counts[cell] += n;
                self.sum_sq[cell] += n * n;
            }
            self.n_samples += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ZeroHistogram) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::InvalidParameter("cannot merge histograms on different grids"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.n_samples += other.n_samples;
        self.residual_violations += other.residual_violations;
        Ok(())
    }

    pub fn finish(&self) -> EmpiricalDensity {
        let n = self.n_samples as f64;
        let area = self.spec.cell_area();
        let mut density = Vec::with_capacity(self.counts.len());
        let mut stderr = Vec::with_capacity(self.counts.len());
        for (&c, &s2) in self.counts.iter().zip(&self.sum_sq) {
            let mean = c as f64 / n;
            density.push(mean / area);
            let se = if self.n_samples > 1 {
                let var = ((s2 as f64 - n * mean * mean) / (n - 1.0)).max(0.0);
                (var / n).sqrt() / area
            } else {
                0.0
            };
            stderr.push(se);
        }
        EmpiricalDensity {
            spec: self.spec,
            counts: self.counts.clone(),
            density,
            stderr,
            overflow: self.overflow,
            n_samples: self.n_samples,
            residual_violations: self.residual_violations,
        }
    }
}

/// Histogram of sampled roots normalised to a density per unit area.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDensity {
    pub spec: GridSpec,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub overflow: u64,
    pub n_samples: u64,
    pub residual_violations: u64,
}

impl EmpiricalDensity {
    pub fn total_roots(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }
}

/// Serial estimate over samples `0..n_samples`.
pub fn empirical_zero_density(
    e: &EnsembleSpec,
    n_samples: u64,
    grid: GridSpec,
    seed: u64,
) -> Result<EmpiricalDensity> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1"));
    }
    let mut h = ZeroHistogram::new(grid)?;
    h.accumulate(e, seed, 0..n_samples)?;
    Ok(h.finish())
}

/// Counts of roots inside a fixed region.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionTally {
    pub inside: u64,
    pub total_roots: u64,
    pub n_samples: u64,
}

impl RegionTally {
    pub fn accumulate(
        &mut self,
        e: &EnsembleSpec,
        region: PlaneRegion,
        seed: u64,
        indices: Range<u64>,
    ) -> Result<()> {
        for k in indices {
            let (rs, _) = sample_roots(e, seed, k)?;
            self.inside += rs.roots.iter().filter(|&&z| region.contains(z)).count() as u64;
            self.total_roots += rs.roots.len() as u64;
            self.n_samples += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &RegionTally) {
        self.inside += other.inside;
        self.total_roots += other.total_roots;
        self.n_samples += other.n_samples;
    }

    /// Mean number of roots per sample inside the region.
    pub fn mean(&self) -> f64 {
        self.inside as f64 / self.n_samples as f64
    }

    pub fn fraction(&self) -> f64 {
        self.inside as f64 / self.total_roots as f64
    }
}

/// Real standard-normal coefficients for real-polynomial sample `index`, times `scale`.
pub fn real_polynomial(degree: usize, seed: u64, index: u64, scale: f64) -> Vec<f64> {
    let mut r = rng::stream(seed, domain::REAL_POLYNOMIAL, index);
    (0..=degree).map(|_| scale * rng::standard_normal(&mut r)).collect()
}

/// Number of real roots of `Σ c_i t^i`.
pub fn count_real_roots(coeffs: &[f64], tol: f64) -> Result<usize> {
    let c: Vec<C64> = coeffs.iter().map(|&x| C64::new(x, 0.0)).collect();
    let rs = roots::find_roots(&c)?;
    Ok(rs
        .roots
        .iter()
        .filter(|z| z.im.abs() <= tol * (1.0 + z.norm()))
        .count())
}

/// Running mean and variance of the real-root count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RealRootTally {
    pub n_samples: u64,
    pub sum: u64,
    pub sum_sq: u64,
}

impl RealRootTally {
    pub fn accumulate(&mut self, degree: usize, seed: u64, indices: Range<u64>, scale: f64, tol: f64) -> Result<()> {
        if degree == 0 {
            return Err(Error::InvalidDegree(0));
        }
        for k in indices {
            let n = count_real_roots(&real_polynomial(degree, seed, k, scale), tol)? as u64;
            self.sum += n;
            self.sum_sq += n * n;
            self.n_samples += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &RealRootTally) {
        self.n_samples += other.n_samples;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    /// `(mean, standard error of the mean)`.
    pub fn mean_stderr(&self) -> (f64, f64) {
        let n = self.n_samples as f64;
        let mean = self.sum as f64 / n;
        if self.n_samples < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Mean and standard error of the number of real roots, serial over `0..n_samples`.
pub fn empirical_real_zero_count(degree: usize, n_samples: u64, seed: u64) -> Result<(f64, f64)> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("n_samples must be at least 2"));
    }
    let mut t = RealRootTally::default();
    t.accumulate(degree, seed, 0..n_samples, 1.0, REAL_ROOT_TOL)?;
    Ok(t.mean_stderr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleKind;
    use crate::kacrice;

    #[test]
    fn linear_real_polynomial_has_one_real_root() {
        let (m, se) = empirical_real_zero_count(1, 500, 3).unwrap();
        assert_eq!(m, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn real_count_matches_quadrature_small_run() {
        let (m, se) = empirical_real_zero_count(10, 20_000, 11).unwrap();
        let e = kacrice::expected_real_zeros(10).unwrap();
        assert!((m - e).abs() < 4.0 * se, "{m} ± {se} vs {e}");
    }

    #[test]
    fn real_count_is_scale_invariant() {
        let mut a = RealRootTally::default();
        let mut b = RealRootTally::default();
        a.accumulate(15, 5, 0..300, 1.0, REAL_ROOT_TOL).unwrap();
        b.accumulate(15, 5, 0..300, 37.5, REAL_ROOT_TOL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_conserves_roots_and_is_deterministic() {
        let e = EnsembleSpec::new(EnsembleKind::Kostlan, 6).unwrap();
        let g = GridSpec::square(-1.0, 1.0, 4).unwrap();
        let d = empirical_zero_density(&e, 50, g, 9).unwrap();
        assert_eq!(d.total_roots(), 50 * 6);
        assert_eq!(d.residual_violations, 0);
        let again = empirical_zero_density(&e, 50, g, 9).unwrap();
        assert_eq!(d, again);
        let one = empirical_zero_density(&e, 1, g, 9).unwrap();
        assert_eq!(one, empirical_zero_density(&e, 1, g, 9).unwrap());
    }

    #[test]
    fn sharded_merge_equals_serial() {
        let e = EnsembleSpec::new(EnsembleKind::Kac, 8).unwrap();
        let g = GridSpec::square(-2.0, 2.0, 5).unwrap();
        let mut whole = ZeroHistogram::new(g).unwrap();
        whole.accumulate(&e, 2, 0..40).unwrap();
        let mut parts = ZeroHistogram::new(g).unwrap();
        for r in [0..7u64, 7..30, 30..40] {
            let mut p = ZeroHistogram::new(g).unwrap();
            p.accumulate(&e, 2, r).unwrap();
            parts.merge(&p).unwrap();
        }
        assert_eq!(whole, parts);
    }

    #[test]
    fn kostlan_origin_cell_density() {
        // ρ(0) = N/π; one cell around the origin, averaged over the cell
        let e = EnsembleSpec::new(EnsembleKind::Kostlan, 20).unwrap();
        let g = GridSpec::square(-0.1, 0.1, 1).unwrap();
        let d = empirical_zero_density(&e, 4000, g, 1).unwrap();
        let want = kacrice::cell_masses(&e, g).unwrap()[0] / g.cell_area();
        assert!((d.density[0] - want).abs() < 4.0 * d.stderr[0], "{} ± {} vs {}", d.density[0], d.stderr[0], want);
    }

    #[test]
    fn stderr_is_zero_for_single_sample() {
        let e = EnsembleSpec::new(EnsembleKind::Kac, 4).unwrap();
        let g = GridSpec::square(-2.0, 2.0, 2).unwrap();
        let d = empirical_zero_density(&e, 1, g, 0).unwrap();
        assert!(d.stderr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn invalid_sample_counts() {
        let e = EnsembleSpec::new(EnsembleKind::Kac, 4).unwrap();
        let g = GridSpec::square(-2.0, 2.0, 2).unwrap();
        assert!(empirical_zero_density(&e, 0, g, 0).is_err());
        assert!(empirical_real_zero_count(4, 1, 0).is_err());
    }

    #[test]
    fn kac_annulus_tally() {
        let e = EnsembleSpec::new(EnsembleKind::Kac, 100).unwrap();
        let region = PlaneRegion::Annulus { r0: 0.9, r1: 1.1 };
        let mut t = RegionTally::default();
        t.accumulate(&e, region, 4, 0..200).unwrap();
        assert!(t.fraction() > 0.5);
        let mass = kacrice::region_mass(&e, region).unwrap();
        assert!((t.mean() - mass).abs() / mass < 0.03);
    }
}
