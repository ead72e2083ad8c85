//! Dyadic frequency decomposition and inhomogeneous Besov norms.
//!
//! `chi` equals 1 on `|xi| <= 1/2`, vanishes for `|xi| >= 1` and is C^inf; the
//! block profile is `phi(xi) = chi(xi/2) - chi(xi)`, supported in `1/2 < |xi| < 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{lp_norm_of, Field};
use crate::grid::Grid;

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^inf transition from 0 (at t <= 0) to 1 (at t >= 1).
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump(t);
        a / (a + bump(1.0 - t))
    }
}

pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step(2.0 * r - 1.0)
}

pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    match pairs.iter().find(|&&(a, b)| !(b >= a && a >= 1.0)) {
        Some(&(a, b)) => Err(Error::InvalidParameter(format!("Bernstein needs b >= a >= 1 (a = {a}, b = {b})"))),
        None => Ok(()),
    }
}

fn pow2(q: i32) -> f64 {
    2.0_f64.powi(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !(p >= 1.0 && r >= 1.0) || s.is_nan() {
            return Err(Error::InvalidParameter(format!("Besov indices need p, r >= 1 (got p = {p}, r = {r})")));
        }
        Ok(Self { s, p, r })
    }

    /// The critical space `B^{1/2}_{2d,1}` for dimension `d`.
    pub fn critical(dim: usize) -> Self {
        Self { s: 0.5, p: 2.0 * dim as f64, r: 1.0 }
    }
}

/// `L^p` norms of the low-pass part and of each dyadic block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockNorms {
    pub p: f64,
    pub low: f64,
    pub blocks: Vec<f64>,
}

impl BlockNorms {
    pub fn besov(&self, s: f64, r: f64) -> f64 {
        let weighted = self.blocks.iter().enumerate().map(|(q, b)| pow2(q as i32).powf(s) * b);
        let tail = if r.is_infinite() {
            weighted.fold(0.0, f64::max)
        } else {
            weighted.map(|w| w.powf(r)).sum::<f64>().powf(1.0 / r)
        };
        self.low + tail
    }

    /// CSV rows `q,weighted_norm`; the low-pass term is reported as `q = -1`.
    pub fn write_profile_csv(&self, mut w: impl Write, s: f64) -> Result<()> {
        writeln!(w, "q,weighted_norm")?;
        writeln!(w, "-1,{}", self.low)?;
        for (q, b) in self.blocks.iter().enumerate() {
            writeln!(w, "{q},{}", pow2(q as i32).powf(s) * b)?;
        }
        Ok(())
    }
}

/// Littlewood-Paley cutoffs on a fixed grid.
#[derive(Clone, Debug)]
pub struct FilterBank {
    grid: Grid,
    q_max: i32,
    radius: Vec<f64>,
}

impl FilterBank {
    pub fn new(grid: Grid) -> Result<Self> {
        let cutoff = grid.dealias_cutoff();
        if cutoff < 2.0 {
            return Err(Error::Unresolved(format!(
                "dealiased band radius {cutoff:.3} does not contain the q = 0 block"
            )));
        }
        let q_max = cutoff.log2().floor() as i32;
        let radius = (0..grid.len())
            .map(|i| {
                let xi = grid.frequency(i);
                (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
            })
            .collect();
        Ok(Self { grid, q_max, radius })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest block index inside the dealiased band.
    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    /// Radius up to which the partition of unity is complete.
    pub fn resolved_radius(&self) -> f64 {
        pow2(self.q_max)
    }

    fn check_block(&self, q: i32) -> Result<()> {
        if q < 0 || q > self.q_max {
            Err(Error::BlockOutOfRange { q, q_max: self.q_max })
        } else {
            Ok(())
        }
    }

    fn filtered(&self, f: &Field, weight: impl Fn(f64) -> f64) -> Result<Field> {
        self.grid.same_as(f.grid())?;
        let c = f.checked_coeffs()?;
        let out: Vec<Complex64> = c.iter().zip(&self.radius).map(|(z, &r)| z * weight(r)).collect();
        Field::from_coeffs(self.grid, out)
    }

    /// `Delta_q f`.
    pub fn dyadic_block(&self, f: &Field, q: i32) -> Result<Field> {
        self.check_block(q)?;
        let scale = pow2(-q);
        self.filtered(f, |r| phi(scale * r))
    }

    /// `S_q f`, defined for `0 <= q <= q_max + 1`.
    pub fn low_pass(&self, f: &Field, q: i32) -> Result<Field> {
        if q < 0 || q > self.q_max + 1 {
            return Err(Error::BlockOutOfRange { q, q_max: self.q_max + 1 });
        }
        let scale = pow2(-q);
        self.filtered(f, |r| chi(scale * r))
    }

    /// Block norms for several exponents at once (one inverse transform per block).
    pub fn block_norms(&self, f: &Field, ps: &[f64]) -> Result<Vec<BlockNorms>> {
        Ok(self.block_survey(f, ps, &[])?.0)
    }

    /// Block norms for `ps` and, per block, the Bernstein ratios for `pairs`,
    /// from a single pass over the blocks.
    pub fn block_survey(&self, f: &Field, ps: &[f64], pairs: &[(f64, f64)]) -> Result<(Vec<BlockNorms>, Vec<Vec<f64>>)> {
        check_pairs(pairs)?;
        let h = self.grid.cell_measure();
        let low = self.low_pass(f, 0)?.into_values();
        let mut out: Vec<BlockNorms> =
            ps.iter().map(|&p| BlockNorms { p, low: lp_norm_of(&low, h, p), blocks: Vec::new() }).collect();
        let mut ratios = Vec::new();
        for q in 0..=self.q_max {
            let b = self.dyadic_block(f, q)?.into_values();
            for bn in out.iter_mut() {
                bn.blocks.push(lp_norm_of(&b, h, bn.p));
            }
            ratios.push(pairs.iter().map(|&(a, c)| self.ratio(&b, q, a, c)).collect());
        }
        Ok((out, ratios))
    }

    pub fn besov_norm(&self, f: &Field, params: BesovParams) -> Result<f64> {
        let params = BesovParams::new(params.s, params.p, params.r)?;
        Ok(self.block_norms(f, &[params.p])?[0].besov(params.s, params.r))
    }

    /// `|Delta_q f|_b / (2^{d(1/a - 1/b) q} |Delta_q f|_a)`, or 0 for a vanishing block.
    pub fn bernstein_check(&self, f: &Field, q: i32, a: f64, b: f64) -> Result<f64> {
        Ok(self.bernstein_ratios(f, q, &[(a, b)])?[0])
    }

    /// [`bernstein_check`](Self::bernstein_check) for several exponent pairs on one block.
    pub fn bernstein_ratios(&self, f: &Field, q: i32, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
        check_pairs(pairs)?;
        let block = self.dyadic_block(f, q)?.into_values();
        Ok(pairs.iter().map(|&(a, b)| self.ratio(&block, q, a, b)).collect())
    }

    fn ratio(&self, block: &[f64], q: i32, a: f64, b: f64) -> f64 {
        let h = self.grid.cell_measure();
        let na = lp_norm_of(block, h, a);
        if na == 0.0 {
            return 0.0;
        }
        let d = self.grid.dim() as f64;
        let inv_b = if b.is_infinite() { 0.0 } else { 1.0 / b };
        let scale = pow2(q).powf(d * (1.0 / a - inv_b));
        lp_norm_of(block, h, b) / (scale * na)
    }

    /// `(|f|_inf, |f|_{B^0_{inf,1}})`.
    pub fn linfty_embedding_check(&self, f: &Field) -> Result<(f64, f64)> {
        let sup = f.sup_norm();
        let b = self.besov_norm(f, BesovParams { s: 0.0, p: f64::INFINITY, r: 1.0 })?;
        Ok((sup, b))
    }

    /// Largest `|chi + sum_q phi_q - 1|` over lattice points with `|xi| <= 2^{q_max}`.
    pub fn partition_residual(&self) -> f64 {
        self.radius
            .iter()
            .filter(|&&r| r <= self.resolved_radius())
            .map(|&r| {
                let s: f64 = (0..=self.q_max).map(|q| phi(pow2(-q) * r)).sum();
                (chi(r) + s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|phi_p phi_q|` over the lattice for block pairs with `|p - q| >= 2`.
    pub fn overlap_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for &r in &self.radius {
            for p in 0..=self.q_max {
                for q in (p + 2)..=self.q_max {
                    worst = worst.max((phi(pow2(-p) * r) * phi(pow2(-q) * r)).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_values() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(1.0), 0.0);
        assert_eq!(phi(0.0), 0.0);
        assert!(phi(1.0) > 0.99);
        assert!((chi(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(FilterBank::new(Grid::square(8, 200.0).unwrap()).is_err());
    }

    #[test]
    fn bad_indices_rejected() {
        assert!(BesovParams::new(0.5, 0.5, 1.0).is_err());
        let bank = FilterBank::new(Grid::square(32, 2.0 * PI).unwrap()).unwrap();
        assert!(bank.dyadic_block(&Field::zeros(*bank.grid()), bank.q_max() + 1).is_err());
    }

    #[test]
    fn constant_has_no_blocks() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let bank = FilterBank::new(g).unwrap();
        let f = Field::from_fn(g, |_, _| 3.0);
        for q in 0..=bank.q_max() {
            assert!(bank.dyadic_block(&f, q).unwrap().sup_norm() < 1e-15);
        }
    }
}
