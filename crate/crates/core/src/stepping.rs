//! Fourth-order Runge-Kutta with an integrating factor for a linear multiplier
//! term (Lawson form): `c' = m c + N(c, t)` is advanced with `exp(h m)` exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::multiplier::Multiplier;

/// Largest accepted Courant number `dt * sum_i |u_i|_inf / h`.
pub const MAX_COURANT: f64 = 1.2;
/// Courant number used when choosing a step.
pub const SAFE_COURANT: f64 = 0.5;

/// Largest stable step for an advection speed bound `speed = sum_i |u_i|_inf`.
pub fn cfl_bound(grid: &Grid, speed: f64) -> f64 {
    if speed > 0.0 {
        MAX_COURANT * grid.spacing() / speed
    } else {
        f64::INFINITY
    }
}

pub fn suggested_dt(grid: &Grid, speed: f64) -> f64 {
    cfl_bound(grid, speed) * SAFE_COURANT / MAX_COURANT
}

pub fn check_cfl(grid: &Grid, speed: f64, dt: f64) -> Result<()> {
    let bound = cfl_bound(grid, speed);
    if !(dt > 0.0) || dt > bound {
        return Err(Error::StepTooLarge { dt, bound });
    }
    Ok(())
}

/// Splits `[0, t]` into equal steps no longer than `dt`.
pub fn uniform_steps(t: f64, dt: f64) -> (usize, f64) {
    if t <= 0.0 {
        return (0, 0.0);
    }
    let m = (t / dt - 1e-9).ceil().max(1.0) as usize;
    (m, t / m as f64)
}

pub struct IfRk4 {
    h: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
}

fn axpy(a: &[Complex64], s: f64, b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
}

fn scale_by(e: &[Complex64], a: &[Complex64]) -> Vec<Complex64> {
    e.iter().zip(a).map(|(x, y)| x * y).collect()
}

impl IfRk4 {
    pub fn new(grid: &Grid, linear: &Multiplier, h: f64) -> Result<Self> {
        let half = linear.exp(0.5 * h)?.lattice(grid)?;
        let full = linear.exp(h)?.lattice(grid)?;
        Ok(Self { h, half, full })
    }

    pub fn dt(&self) -> f64 {
        self.h
    }

    /// One step from `c` at time `t`.
    pub fn step(
        &self,
        c: &[Complex64],
        t: f64,
        mut nonlinear: impl FnMut(&[Complex64], f64) -> Result<Vec<Complex64>>,
    ) -> Result<Vec<Complex64>> {
        let h = self.h;
        let k1 = nonlinear(c, t)?;
        let k2 = nonlinear(&scale_by(&self.half, &axpy(c, 0.5 * h, &k1)), t + 0.5 * h)?;
        let ec_half = scale_by(&self.half, c);
        let k3 = nonlinear(&axpy(&ec_half, 0.5 * h, &k2), t + 0.5 * h)?;
        let ec_full = scale_by(&self.full, c);
        let k4 = nonlinear(&axpy(&ec_full, h, &scale_by(&self.half, &k3)), t + h)?;
        Ok((0..c.len())
            .map(|i| ec_full[i] + (self.full[i] * k1[i] + self.half[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
            .collect())
    }
}
