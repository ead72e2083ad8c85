//! Particle trajectories and discrete flow maps.

use crate::calculus::{gradient, operator_norm_2x2};
use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::grid::Grid;
use crate::interp::{eval_slices, Interpolator};
use crate::stepping::uniform_steps;

/// A (possibly time-dependent) planar velocity field.
pub trait Velocity: Sync {
    fn at(&self, x: [f64; 2], t: f64) -> [f64; 2];
    /// Bound on `|u|` over the time window of interest.
    fn sup_norm(&self) -> f64;
    /// Bound on `|grad u|` (operator norm) over the time window of interest.
    fn lipschitz(&self) -> f64;
    fn is_stationary(&self) -> bool {
        false
    }

    /// Samples on a grid at time `t`.
    fn sample(&self, grid: &Grid, t: f64) -> VectorField {
        let mut a = vec![0.0; grid.len()];
        let mut b = vec![0.0; grid.len()];
        for idx in 0..grid.len() {
            let v = self.at(grid.point(idx), t);
            a[idx] = v[0];
            b[idx] = v[1];
        }
        let mut comps = vec![Field::from_values(*grid, a).expect("length")];
        if grid.dim() == 2 {
            comps.push(Field::from_values(*grid, b).expect("length"));
        }
        VectorField::new(comps)
    }
}

/// Velocity given by a closure with user-supplied bounds.
pub struct AnalyticVelocity<F> {
    f: F,
    sup: f64,
    lip: f64,
    stationary: bool,
}

impl<F: Fn([f64; 2], f64) -> [f64; 2] + Sync> AnalyticVelocity<F> {
    pub fn new(f: F, sup: f64, lip: f64, stationary: bool) -> Self {
        Self { f, sup, lip, stationary }
    }
}

impl<F: Fn([f64; 2], f64) -> [f64; 2] + Sync> Velocity for AnalyticVelocity<F> {
    fn at(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        (self.f)(x, t)
    }
    fn sup_norm(&self) -> f64 {
        self.sup
    }
    fn lipschitz(&self) -> f64 {
        self.lip
    }
    fn is_stationary(&self) -> bool {
        self.stationary
    }
}

/// The cellular flow `(sin x cos y, -cos x sin y)` scaled by `amplitude`.
pub fn cellular_velocity(amplitude: f64) -> AnalyticVelocity<impl Fn([f64; 2], f64) -> [f64; 2] + Sync> {
    AnalyticVelocity::new(
        move |p: [f64; 2], _t: f64| [amplitude * p[0].sin() * p[1].cos(), -amplitude * p[0].cos() * p[1].sin()],
        amplitude.abs(),
        amplitude.abs(),
        true,
    )
}

pub fn zero_velocity() -> AnalyticVelocity<impl Fn([f64; 2], f64) -> [f64; 2] + Sync> {
    AnalyticVelocity::new(|_p: [f64; 2], _t: f64| [0.0, 0.0], 0.0, 0.0, true)
}

pub fn constant_velocity(v: [f64; 2]) -> AnalyticVelocity<impl Fn([f64; 2], f64) -> [f64; 2] + Sync> {
    AnalyticVelocity::new(move |_p: [f64; 2], _t: f64| v, (v[0] * v[0] + v[1] * v[1]).sqrt(), 0.0, true)
}

/// Stationary velocity known on a grid, evaluated off-grid by interpolation.
pub struct GriddedVelocity {
    grid: Grid,
    components: [Vec<f64>; 2],
    sup: f64,
    lip: f64,
}

impl GriddedVelocity {
    pub fn new(u: &VectorField) -> Self {
        let grid = *u.grid();
        Self {
            grid,
            components: [u.components[0].values().into_owned(), u.components[1].values().into_owned()],
            sup: u.sup_norm(),
            lip: u.lipschitz(),
        }
    }
}

impl Velocity for GriddedVelocity {
    fn at(&self, x: [f64; 2], _t: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        eval_slices(&self.grid, &[&self.components[0], &self.components[1]], x[0], x[1], &mut out);
        out
    }
    fn sup_norm(&self) -> f64 {
        self.sup
    }
    fn lipschitz(&self) -> f64 {
        self.lip
    }
    fn is_stationary(&self) -> bool {
        true
    }
    fn sample(&self, grid: &Grid, t: f64) -> VectorField {
        if grid == &self.grid {
            VectorField::new(
                self.components.iter().map(|c| Field::from_values(*grid, c.clone()).expect("length")).collect(),
            )
        } else {
            let mut a = vec![0.0; grid.len()];
            let mut b = vec![0.0; grid.len()];
            for idx in 0..grid.len() {
                let v = self.at(grid.point(idx), t);
                a[idx] = v[0];
                b[idx] = v[1];
            }
            VectorField::new(vec![Field::from_values(*grid, a).expect("len"), Field::from_values(*grid, b).expect("len")])
        }
    }
}

/// `-u(x, t_end - t)`: integrating it for time `t_end` inverts the flow of `u`.
pub struct Reversed<'a> {
    inner: &'a dyn Velocity,
    t_end: f64,
}

impl<'a> Reversed<'a> {
    pub fn new(inner: &'a dyn Velocity, t_end: f64) -> Self {
        Self { inner, t_end }
    }
}

impl Velocity for Reversed<'_> {
    fn at(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let v = self.inner.at(x, self.t_end - t);
        [-v[0], -v[1]]
    }
    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
    fn is_stationary(&self) -> bool {
        self.inner.is_stationary()
    }
}

/// Largest time step accepted for characteristic integration.
pub fn step_bound(u: &dyn Velocity) -> f64 {
    let lip = u.lipschitz();
    if lip > 0.0 {
        1.0 / lip
    } else {
        f64::INFINITY
    }
}

/// One classical RK4 step along a characteristic.
pub fn rk4_step(u: &dyn Velocity, p: [f64; 2], t: f64, h: f64) -> [f64; 2] {
    let k1 = u.at(p, t);
    let k2 = u.at([p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]], t + 0.5 * h);
    let k3 = u.at([p[0] + 0.5 * h * k2[0], p[1] + 0.5 * h * k2[1]], t + 0.5 * h);
    let k4 = u.at([p[0] + h * k3[0], p[1] + h * k3[1]], t + h);
    [
        p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn checked_step(u: &dyn Velocity, dt: f64) -> Result<()> {
    let bound = step_bound(u);
    if !(dt > 0.0) || dt > bound {
        return Err(Error::StepTooLarge { dt, bound });
    }
    Ok(())
}

/// Advances points from time `t0` to `t0 + t` with RK4 steps of at most `dt`.
pub fn trace_points(u: &dyn Velocity, points: &[[f64; 2]], t0: f64, t: f64, dt: f64) -> Result<Vec<[f64; 2]>> {
    checked_step(u, dt)?;
    let (steps, h) = uniform_steps(t, dt);
    if steps == 0 {
        return Ok(points.to_vec());
    }
    Ok(points
        .iter()
        .map(|&p0| {
            let mut p = p0;
            for s in 0..steps {
                p = rk4_step(u, p, t0 + s as f64 * h, h);
            }
            p
        })
        .collect())
}

/// Displacements of every grid point under the flow of `u` over `[0, t]`.
fn displacement(u: &dyn Velocity, grid: &Grid, t: f64, dt: f64) -> Result<VectorField> {
    let starts: Vec<[f64; 2]> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let ends = trace_points(u, &starts, 0.0, t, dt)?;
    let mut a = vec![0.0; grid.len()];
    let mut b = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        a[i] = ends[i][0] - starts[i][0];
        b[i] = ends[i][1] - starts[i][1];
    }
    Ok(VectorField::new(vec![Field::from_values(*grid, a)?, Field::from_values(*grid, b)?]))
}

/// `Phi(., t)` and its inverse stored as periodic displacements.
#[derive(Clone, Debug)]
pub struct FlowMap {
    pub grid: Grid,
    pub t: f64,
    pub forward: VectorField,
    pub backward: VectorField,
    pub lip_forward: f64,
    pub lip_backward: f64,
}

pub fn integrate_flow(u: &dyn Velocity, grid: Grid, t: f64, dt: f64) -> Result<FlowMap> {
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter("flow maps are computed on 2D grids".into()));
    }
    let forward = displacement(u, &grid, t, dt)?;
    let backward = displacement(&Reversed::new(u, t), &grid, t, dt)?;
    let lip_forward = forward.lipschitz();
    let lip_backward = backward.lipschitz();
    Ok(FlowMap { grid, t, forward, backward, lip_forward, lip_backward })
}

impl FlowMap {
    pub fn identity(grid: Grid) -> Self {
        let z = VectorField::new(vec![Field::zeros(grid), Field::zeros(grid)]);
        Self { grid, t: 0.0, forward: z.clone(), backward: z, lip_forward: 0.0, lip_backward: 0.0 }
    }

    /// `max(|Phi - Id|_Lip, |Phi^{-1} - Id|_Lip)`.
    pub fn m(&self) -> f64 {
        self.lip_forward.max(self.lip_backward)
    }

    pub fn max_displacement(&self) -> f64 {
        self.forward.sup_norm().max(self.backward.sup_norm())
    }

    /// `det(D Phi)` at every grid point.
    pub fn jacobian_determinant(&self) -> Field {
        let gx = gradient(&self.forward.components[0]).components;
        let gy = gradient(&self.forward.components[1]).components;
        let (a, b, c, d) = (gx[0].values(), gx[1].values(), gy[0].values(), gy[1].values());
        let v = (0..self.grid.len()).map(|i| (1.0 + a[i]) * (1.0 + d[i]) - b[i] * c[i]).collect();
        Field::from_values(self.grid, v).expect("length")
    }

    /// `max |Phi(Phi^{-1}(x)) - x|` over the grid.
    pub fn composition_residual(&self) -> f64 {
        let fa = self.forward.components[0].values();
        let fb = self.forward.components[1].values();
        let it = Interpolator::new(self.grid, vec![&fa, &fb]);
        let ba = self.backward.components[0].values();
        let bb = self.backward.components[1].values();
        let mut out = [0.0; 2];
        let mut worst = 0.0_f64;
        for i in 0..self.grid.len() {
            let [x, y] = self.grid.point(i);
            let (px, py) = (x + ba[i], y + bb[i]);
            it.eval_into(px, py, &mut out);
            worst = worst.max(((ba[i] + out[0]).powi(2) + (bb[i] + out[1]).powi(2)).sqrt());
        }
        worst
    }

    fn compose_with(&self, f: &Field, disp: &VectorField) -> Result<Field> {
        self.grid.same_as(f.grid())?;
        let limit = self.grid.period() / 2.0;
        let d = disp.sup_norm();
        if d > limit {
            return Err(Error::DisplacementTooLarge { displacement: d, limit });
        }
        let v = f.values();
        let it = Interpolator::new(self.grid, vec![&v]);
        let (da, db) = (disp.components[0].values(), disp.components[1].values());
        let out = (0..self.grid.len())
            .map(|i| {
                let [x, y] = self.grid.point(i);
                it.eval(x + da[i], y + db[i])
            })
            .collect();
        Field::from_values(self.grid, out)
    }

    /// `f o Phi`.
    pub fn compose(&self, f: &Field) -> Result<Field> {
        self.compose_with(f, &self.forward)
    }

    /// `f o Phi^{-1}`.
    pub fn compose_inverse(&self, f: &Field) -> Result<Field> {
        self.compose_with(f, &self.backward)
    }
}

/// Operator norm of a 2x2 matrix, re-exported for callers building bounds.
pub fn matrix_norm(m: [[f64; 2]; 2]) -> f64 {
    operator_norm_2x2(m[0][0], m[0][1], m[1][0], m[1][1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_velocity_gives_identity() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let phi = integrate_flow(&zero_velocity(), g, 1.0, 0.1).unwrap();
        assert_eq!(phi.max_displacement(), 0.0);
    }

    #[test]
    fn constant_velocity_translates() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let phi = integrate_flow(&constant_velocity([1.0, 0.0]), g, 0.5, 0.1).unwrap();
        let a = phi.forward.components[0].values();
        assert!(a.iter().all(|v| (v - 0.5).abs() < 1e-14));
        assert!(phi.forward.components[1].sup_norm() == 0.0);
        assert!(phi.lip_forward < 1e-13);
    }

    #[test]
    fn step_bound_enforced() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        match integrate_flow(&cellular_velocity(4.0), g, 1.0, 0.5) {
            Err(Error::StepTooLarge { bound, .. }) => assert!((bound - 0.25).abs() < 1e-15),
            other => panic!("expected step error, got {other:?}"),
        }
    }
}
