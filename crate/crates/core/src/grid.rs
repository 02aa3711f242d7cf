//! Rectangular cell grids in the complex plane.

use alloc::vec::Vec;

use crate::{Error, Result, C64};

/// Axis-aligned grid of `nx × ny` equal cells covering `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub y0: f64,
    pub y1: f64,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        let g = Self {
            x0: x.0,
            x1: x.1,
            nx: x.2,
            y0: y.0,
            y1: y.1,
            ny: y.2,
        };
        g.validate()?;
        Ok(g)
    }

    /// Same range and bin count on both axes.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new((lo, hi, n), (lo, hi, n))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite());
        if !finite || self.x1 <= self.x0 || self.y1 <= self.y0 {
            return Err(Error::InvalidRegion("grid ranges must be finite and increasing"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidRegion("grid needs at least one cell per axis"));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y1 - self.y0) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Row-major index (rows run along `y`) of the cell containing `z`.
    pub fn locate(&self, z: C64) -> Option<usize> {
        if !(z.re >= self.x0 && z.re < self.x1 && z.im >= self.y0 && z.im < self.y1) {
            return None;
        }
        let i = (((z.re - self.x0) / self.dx()) as usize).min(self.nx - 1);
        let j = (((z.im - self.y0) / self.dy()) as usize).min(self.ny - 1);
        Some(j * self.nx + i)
    }

    pub fn cell_center(&self, index: usize) -> C64 {
        let (i, j) = (index % self.nx, index / self.nx);
        C64::new(
            self.x0 + (i as f64 + 0.5) * self.dx(),
            self.y0 + (j as f64 + 0.5) * self.dy(),
        )
    }

    /// `((x0, x1), (y0, y1))` of cell `index`.
    pub fn cell_bounds(&self, index: usize) -> ((f64, f64), (f64, f64)) {
        let (i, j) = (index % self.nx, index / self.nx);
        let xa = self.x0 + i as f64 * self.dx();
        let ya = self.y0 + j as f64 * self.dy();
        ((xa, xa + self.dx()), (ya, ya + self.dy()))
    }
}

/// Per-cell density values (zeros per unit area), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_and_center_round_trip() {
        let g = GridSpec::new((-3.0, 3.0, 6), (-1.0, 1.0, 4)).unwrap();
        for k in 0..g.cells() {
            assert_eq!(g.locate(g.cell_center(k)), Some(k));
        }
        assert_eq!(g.locate(C64::new(3.0, 0.0)), None);
        assert_eq!(g.locate(C64::new(0.0, -1.5)), None);
        assert_eq!(g.cell_area(), 0.5);
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(GridSpec::square(1.0, 1.0, 3).is_err());
        assert!(GridSpec::square(0.0, 1.0, 0).is_err());
        assert!(GridSpec::square(0.0, f64::NAN, 2).is_err());
    }
}
