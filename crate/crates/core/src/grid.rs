use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid with `n` points per axis on `[0, period)^dim`.
///
/// Samples are stored row-major with the x index fastest. Coordinates are
/// reported in the centered representative `[-period/2, period/2)` so that the
/// origin is sample 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    period: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two >= 8")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        Ok(Self { dim, n, period })
    }

    pub fn line(n: usize, period: f64) -> Result<Self> {
        Self::new(1, n, period)
    }

    pub fn square(n: usize, period: f64) -> Result<Self> {
        Self::new(2, n, period)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Volume element of one sample.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn domain_measure(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    /// Lattice spacing in frequency space.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn nyquist(&self) -> f64 {
        self.frequency_step() * (self.n / 2) as f64
    }

    /// Radius of the 2/3-rule retained band.
    pub fn dealias_cutoff(&self) -> f64 {
        self.frequency_step() * self.n as f64 / 3.0
    }

    /// Signed integer wavenumber of axis index `i` (Nyquist reported negative).
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        self.frequency_step() * self.signed_index(i) as f64
    }

    /// Centered coordinate of axis index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        self.spacing() * self.signed_index(i) as f64
    }

    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.n, idx / self.n]
        }
    }

    pub fn flat_index(&self, ix: usize, iy: usize) -> usize {
        if self.dim == 1 {
            ix
        } else {
            iy * self.n + ix
        }
    }

    /// Physical frequency of flat index `idx`; the second component is 0 in 1D.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let [ix, iy] = self.axis_indices(idx);
        if self.dim == 1 {
            [self.wavenumber(ix), 0.0]
        } else {
            [self.wavenumber(ix), self.wavenumber(iy)]
        }
    }

    /// Centered coordinates of flat index `idx`; the second component is 0 in 1D.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [ix, iy] = self.axis_indices(idx);
        if self.dim == 1 {
            [self.coord(ix), 0.0]
        } else {
            [self.coord(ix), self.coord(iy)]
        }
    }

    /// True when the mode survives the 2/3 truncation on every axis.
    pub fn is_dealiased(&self, idx: usize) -> bool {
        let cut = (self.n / 3) as i64;
        let [ix, iy] = self.axis_indices(idx);
        self.signed_index(ix).abs() <= cut && (self.dim == 1 || self.signed_index(iy).abs() <= cut)
    }

    /// Axis indices that sit on the Nyquist line.
    pub fn nyquist_axes(&self, idx: usize) -> [bool; 2] {
        let [ix, iy] = self.axis_indices(idx);
        [ix == self.n / 2, self.dim == 2 && iy == self.n / 2]
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::square(12, 1.0).is_err());
        assert!(Grid::square(4, 1.0).is_err());
        assert!(Grid::new(3, 8, 1.0).is_err());
        assert!(Grid::square(8, 0.0).is_err());
    }

    #[test]
    fn lattice_frequencies_are_integer_multiples() {
        let g = Grid::square(16, 3.0).unwrap();
        for idx in 0..g.len() {
            let xi = g.frequency(idx);
            for c in xi {
                let m = c / g.frequency_step();
                assert!((m - m.round()).abs() < 1e-12);
            }
        }
        assert_eq!(g.signed_index(8), -8);
        assert_eq!(g.point(0), [0.0, 0.0]);
    }
}
