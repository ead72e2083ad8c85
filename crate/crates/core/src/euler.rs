//! Pseudospectral 2D Euler in vorticity form, the version forced by `R2 R2 omega`,
//! and the 2 1/2-dimensional flow built from a planar flow and an advected scalar.

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{advection_coeffs, dealias_coeffs, gradient, jacobian, perp_grad_inv_laplacian, vorticity};
use crate::counterexamples::{
    bilinear_pressure_source, frobenius, pressure_hessian, pressure_source_from_jacobian, yudovich_cross, C1Datum,
};
use crate::error::{Error, Result};
use crate::fft;
use crate::field::{Field, VectorField};
use crate::flow::{trace_points, GriddedVelocity, Reversed, Velocity};
use crate::grid::Grid;
use crate::interp::Interpolator;
use crate::littlewood_paley::{BesovParams, FilterBank};
use crate::multiplier::Multiplier;
use crate::stepping::{check_cfl, suggested_dt, uniform_steps, IfRk4};

/// Largest tolerated mean of the vorticity.
pub const MEAN_TOL: f64 = 1e-10;

/// Vorticity on a 2D grid, kept band-limited to the 2/3 band.
#[derive(Clone, Debug)]
pub struct EulerState {
    pub omega: Field,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub sup: f64,
    pub besov: f64,
    pub curl_residual: f64,
}

/// Packs the velocity of `c` into one complex array (`u1 + i u2`).
fn velocity_of(grid: &Grid, c: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(idx, &ck)| {
            let xi = grid.frequency(idx);
            let k2 = xi[0] * xi[0] + xi[1] * xi[1];
            if idx == 0 || !grid.nyquist_axes(idx).iter().all(|b| !b) {
                return Complex64::new(0.0, 0.0);
            }
            let psi = ck / k2;
            let u1 = -i * xi[1] * psi;
            let u2 = i * xi[0] * psi;
            u1 + i * u2
        })
        .collect();
    fft::inverse_complex(grid, &mut z);
    (z.iter().map(|w| w.re).collect(), z.iter().map(|w| w.im).collect())
}

fn speed(u: &(Vec<f64>, Vec<f64>)) -> f64 {
    let m = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    m(&u.0) + m(&u.1)
}

impl EulerState {
    pub fn new(omega: &Field) -> Result<Self> {
        let grid = *omega.grid();
        if grid.dim() != 2 {
            return Err(Error::InvalidParameter("Euler runs on 2D grids".into()));
        }
        let mean = omega.mean();
        if mean.abs() > MEAN_TOL {
            return Err(Error::NonZeroMean { mean });
        }
        let mut c = omega.coeffs().into_owned();
        c[0] = Complex64::new(0.0, 0.0);
        dealias_coeffs(&grid, &mut c);
        Ok(Self { omega: Field::from_coeffs(grid, c)?, t: 0.0 })
    }

    pub fn grid(&self) -> &Grid {
        self.omega.grid()
    }

    pub fn velocity(&self) -> Result<VectorField> {
        perp_grad_inv_laplacian(&self.omega)
    }

    /// `sum_i |u_i|_inf`, the speed entering the CFL condition.
    pub fn advection_speed(&self) -> f64 {
        speed(&velocity_of(self.grid(), &self.omega.coeffs()))
    }

    pub fn suggested_dt(&self) -> f64 {
        suggested_dt(self.grid(), self.advection_speed())
    }

    /// `(1/2) int |u|^2`.
    pub fn energy(&self) -> f64 {
        let grid = self.grid();
        let c = self.omega.coeffs();
        let sum: f64 = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(idx, z)| {
                let xi = grid.frequency(idx);
                z.norm_sqr() / (xi[0] * xi[0] + xi[1] * xi[1])
            })
            .sum();
        0.5 * grid.domain_measure() * sum
    }

    /// `(1/2) int omega^2`.
    pub fn enstrophy(&self) -> f64 {
        let c = self.omega.coeffs();
        0.5 * self.grid().domain_measure() * c.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn diagnostics(&self, bank: &FilterBank) -> Result<Diagnostics> {
        let u = self.velocity()?;
        let curl_residual = vorticity(&u).distance(&self.omega);
        Ok(Diagnostics {
            t: self.t,
            energy: self.energy(),
            enstrophy: self.enstrophy(),
            sup: self.omega.sup_norm(),
            besov: bank.besov_norm(&self.omega, BesovParams::critical(2))?,
            curl_residual,
        })
    }
}

/// Reusable stepper for a fixed step and forcing.
pub struct EulerStepper {
    grid: Grid,
    inner: IfRk4,
}

impl EulerStepper {
    /// Plain 2D Euler.
    pub fn free(grid: Grid, dt: f64) -> Result<Self> {
        Ok(Self { grid, inner: IfRk4::new(&grid, &Multiplier::zero(), dt)? })
    }

    /// Euler forced by `R2 R2 omega`, the drag term `-d_y u1`.
    pub fn perturbed(grid: Grid, dt: f64) -> Result<Self> {
        Ok(Self { grid, inner: IfRk4::new(&grid, &Multiplier::riesz_pair(2, 2)?, dt)? })
    }

    pub fn dt(&self) -> f64 {
        self.inner.dt()
    }

    pub fn step(&self, state: &EulerState) -> Result<EulerState> {
        let grid = self.grid;
        grid.same_as(state.grid())?;
        let c = state.omega.coeffs();
        check_cfl(&grid, speed(&velocity_of(&grid, &c)), self.dt())?;
        let next = self.inner.step(&c, state.t, |ck, _| {
            let (u1, u2) = velocity_of(&grid, ck);
            Ok(advection_coeffs(&grid, &[&u1, &u2], ck).into_iter().map(|z| -z).collect())
        })?;
        let omega = Field::from_coeffs(grid, next)?;
        let sup = omega.sup_norm();
        if !sup.is_finite() {
            return Err(Error::BlowUp { t: state.t + self.dt(), sup });
        }
        Ok(EulerState { omega, t: state.t + self.dt() })
    }
}

pub fn step_euler2d(state: &EulerState, dt: f64) -> Result<EulerState> {
    EulerStepper::free(*state.grid(), dt)?.step(state)
}

pub fn step_perturbed(state: &EulerState, dt: f64) -> Result<EulerState> {
    EulerStepper::perturbed(*state.grid(), dt)?.step(state)
}

/// Runs `stepper` to `t_end`, calling `observer` on the initial and every
/// later state.
pub fn run(
    stepper: &EulerStepper,
    initial: &EulerState,
    t_end: f64,
    mut observer: impl FnMut(&EulerState) -> Result<()>,
) -> Result<EulerState> {
    let steps = ((t_end - initial.t) / stepper.dt() - 1e-9).ceil().max(0.0) as usize;
    let mut state = initial.clone();
    observer(&state)?;
    for _ in 0..steps {
        state = stepper.step(&state)?;
        observer(&state)?;
    }
    Ok(state)
}

/// Largest displacement per semi-Lagrangian step, in grid cells.
pub const MAX_STEP_CELLS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarRecord {
    pub t: f64,
    pub sup: f64,
    pub grad_sup: f64,
    /// `max |(d_y u3, -d_x u3, w_h)|` with `w_h` the counterclockwise curl of the planar flow.
    pub vorticity_sup: f64,
}

#[derive(Clone, Debug)]
pub struct TwoAndHalfD {
    pub u3: Field,
    pub t: f64,
    pub records: Vec<ScalarRecord>,
}

fn scalar_record(t: f64, u3: &Field, horizontal: &Field) -> ScalarRecord {
    let g = gradient(u3);
    let (gx, gy) = (g.components[0].values(), g.components[1].values());
    let h = horizontal.values();
    let mut grad_sup = 0.0_f64;
    let mut vort_sup = 0.0_f64;
    for i in 0..gx.len() {
        let s = gx[i] * gx[i] + gy[i] * gy[i];
        grad_sup = grad_sup.max(s.sqrt());
        vort_sup = vort_sup.max((s + h[i] * h[i]).sqrt());
    }
    ScalarRecord { t, sup: u3.sup_norm(), grad_sup, vorticity_sup: vort_sup }
}

/// Advects `u3` by a planar flow on `[0, t_end]` with the semi-Lagrangian
/// update `u3(t + dt) = u3(t) o Phi(t + dt -> t)`.
///
/// Third-component vorticity is reported in the usual counterclockwise sign,
/// i.e. `-omega` in the crate convention.
pub fn evolve_25d(u_h: &dyn Velocity, u3_0: &Field, t_end: f64, dt: f64) -> Result<TwoAndHalfD> {
    let grid = *u3_0.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter("2 1/2-dimensional runs need a 2D grid".into()));
    }
    let (steps, h) = uniform_steps(t_end, dt);
    let starts: Vec<[f64; 2]> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let limit = MAX_STEP_CELLS * grid.spacing();
    let feet = |t: f64| -> Result<Vec<[f64; 2]>> {
        let rev = Reversed::new(u_h, t + h);
        let lip = u_h.lipschitz();
        let sub = if lip > 0.0 { h.min(0.5 / lip) } else { h };
        let ends = trace_points(&rev, &starts, 0.0, h, sub)?;
        let worst = starts
            .iter()
            .zip(&ends)
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .fold(0.0_f64, f64::max);
        if worst > limit {
            return Err(Error::DisplacementTooLarge { displacement: worst, limit });
        }
        Ok(ends)
    };
    let horizontal = |t: f64| -> Field { vorticity(&u_h.sample(&grid, t)).scaled(-1.0) };
    let stationary_feet = if u_h.is_stationary() { Some(feet(0.0)?) } else { None };
    let fixed_horizontal = if u_h.is_stationary() { Some(horizontal(0.0)) } else { None };

    let mut u3 = u3_0.to_physical()?;
    let mut records = vec![scalar_record(0.0, &u3, &fixed_horizontal.clone().unwrap_or_else(|| horizontal(0.0)))];
    for k in 0..steps {
        let t = k as f64 * h;
        let owned;
        let ends = match &stationary_feet {
            Some(e) => e,
            None => {
                owned = feet(t)?;
                &owned
            }
        };
        let v = u3.values().into_owned();
        let it = Interpolator::new(grid, vec![&v]);
        let next: Vec<f64> = ends.iter().map(|p| it.eval(p[0], p[1])).collect();
        u3 = Field::from_values(grid, next)?;
        let t_next = (k + 1) as f64 * h;
        let hz = match &fixed_horizontal {
            Some(f) => f.clone(),
            None => horizontal(t_next),
        };
        records.push(scalar_record(t_next, &u3, &hz));
    }
    Ok(TwoAndHalfD { u3, t: steps as f64 * h, records })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderRecord {
    pub t: f64,
    /// Smallest fitted exponent over the probe directions.
    pub alpha: f64,
    pub r_squared: f64,
}

/// Hölder exponent of the flow map of the mollified cross vorticity near its
/// stagnation point, from `|Phi(r e)| ~ r^alpha` at `r = 2^{-k}`, `k` in `scales`.
pub fn yudovich_regularity_probe(
    grid: Grid,
    smoothing: f64,
    times: &[f64],
    scales: &[u32],
    dt: f64,
) -> Result<Vec<HolderRecord>> {
    let omega = yudovich_cross(grid, smoothing)?;
    let radii: Vec<f64> = scales.iter().map(|&k| 2f64.powi(-(k as i32))).collect();
    if let Some(&r) = radii.iter().copied().reduce(f64::min).as_ref() {
        if r < smoothing.max(2.0 * grid.spacing()) {
            return Err(Error::Unresolved(format!("probe radius {r} is below the smoothing scale {smoothing}")));
        }
    }
    if radii.len() < 2 {
        return Err(Error::InvalidParameter("the Hölder fit needs at least two scales".into()));
    }
    let u = GriddedVelocity::new(&perp_grad_inv_laplacian(&omega)?);
    let directions = [[1.0, 0.0], [0.0, 1.0]];
    let mut starts = Vec::new();
    for d in directions {
        for &r in &radii {
            starts.push([r * d[0], r * d[1]]);
        }
    }
    let step = dt.min(0.5 / u.lipschitz());
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let ends = trace_points(&u, &starts, 0.0, t, step)?;
        let mut alpha = f64::INFINITY;
        let mut r2 = 1.0_f64;
        for (di, _) in directions.iter().enumerate() {
            let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
            let ys: Vec<f64> = (0..radii.len())
                .map(|k| {
                    let p = ends[di * radii.len() + k];
                    (p[0] * p[0] + p[1] * p[1]).sqrt().ln()
                })
                .collect();
            let fit = crate::fit::linear_fit(&xs, &ys)?;
            if fit.slope < alpha {
                alpha = fit.slope;
                r2 = fit.r_squared;
            }
        }
        out.push(HolderRecord { t, alpha, r_squared: r2 });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpRecord {
    pub t: f64,
    pub p: f64,
    pub grad_u: f64,
    pub pressure_hessian: f64,
}

/// `L^p` norms of `grad u` and `D^2 p` (pointwise Frobenius) for a velocity field.
pub fn lp_profile(u: &VectorField, t: f64, ps: &[f64]) -> Result<Vec<LpRecord>> {
    let g = frobenius(&jacobian(u));
    let hess = frobenius(&pressure_hessian(&bilinear_pressure_source(u))?);
    Ok(ps.iter().map(|&p| LpRecord { t, p, grad_u: g.lp_norm(p), pressure_hessian: hess.lp_norm(p) }).collect())
}

/// `(p, |D^2 p_0|_p)` for the datum's pressure, using its exact gradient.
pub fn pressure_hessian_profile(datum: &C1Datum, ps: &[f64]) -> Result<Vec<(f64, f64)>> {
    let source = pressure_source_from_jacobian(&datum.grad_u);
    let hess = frobenius(&pressure_hessian(&source)?);
    Ok(ps.iter().map(|&p| (p, hess.lp_norm(p))).collect())
}

/// `L^p` norms of `grad u` and `D^2 p` along a free Euler run from the `C^1`
/// datum (projected to the 2/3 band), at each time in `times`.
pub fn lp_growth_probe(datum: &C1Datum, times: &[f64], dt: f64, ps: &[f64]) -> Result<Vec<LpRecord>> {
    let grid = *datum.u.grid();
    let omega = datum.vorticity();
    let mean = omega.mean();
    let mut state = EulerState::new(&omega.map(|v| v - mean))?;
    let stepper = EulerStepper::free(grid, dt)?;
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for &t in &sorted {
        if t > state.t {
            state = run(&stepper, &state, t, |_| Ok(()))?;
        }
        out.extend(lp_profile(&state.velocity()?, state.t, ps)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::cellular_vorticity;
    use std::f64::consts::PI;

    #[test]
    fn packed_velocity_matches_biot_savart() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let w = Field::random_smooth(g, 4.0, true, 3);
        let (u1, u2) = velocity_of(&g, &w.coeffs());
        let u = perp_grad_inv_laplacian(&w).unwrap();
        let d1 = u1.iter().zip(u.components[0].values().iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let d2 = u2.iter().zip(u.components[1].values().iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d1 < 1e-13 && d2 < 1e-13, "{d1} {d2}");
    }

    #[test]
    fn cellular_flow_is_stationary() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let s0 = EulerState::new(&cellular_vorticity(g).unwrap()).unwrap();
        let s1 = step_euler2d(&s0, 0.05).unwrap();
        assert!(s1.omega.distance(&s0.omega) < 1e-13);
    }

    #[test]
    fn nonzero_mean_rejected() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        assert!(matches!(EulerState::new(&Field::from_fn(g, |_, _| 1.0)), Err(Error::NonZeroMean { .. })));
    }
}
