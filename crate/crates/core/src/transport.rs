//! Forced linear transport `f_t + u . grad f = R f`, the commutator of a
//! multiplier with composition by a flow map, and the Duhamel identity along
//! characteristics.

use num_complex::Complex64;

use crate::calculus::{advection_coeffs, dealias};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::flow::{FlowMap, Velocity};
use crate::grid::Grid;
use crate::interp::Interpolator;
use crate::littlewood_paley::{BesovParams, FilterBank};
use crate::multiplier::Multiplier;
use crate::stepping::{check_cfl, uniform_steps, IfRk4};

/// Sup-norm level treated as blow-up.
pub const BLOW_UP: f64 = 1e6;
/// Relative size of coefficients tolerated outside the 2/3 band in initial data.
pub const BAND_LIMIT_TOL: f64 = 1e-10;

/// `R(w o Phi) - (R w) o Phi`.
pub fn commutator_apply(r: &Multiplier, phi: &FlowMap, w: &Field) -> Result<Field> {
    let composed = phi.compose(w)?;
    let a = r.apply(&composed)?;
    let b = phi.compose(&r.apply(w)?)?;
    a.sub(&b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorRecord {
    pub t: f64,
    pub m: f64,
    /// Largest `|[R,Phi]w|_B / |w|_B` over the suite, in `B^{1/2}_{4,1}`.
    pub besov_ratio: f64,
    /// `(p, largest |[R,Phi]w|_p / |w|_p)`.
    pub lp_ratios: Vec<(f64, f64)>,
}

/// Largest `M` for which the small-map regime is assumed.
pub const SMALL_MAP: f64 = 0.2;

/// Commutator norms for the flow maps of `u` at each time in `times`.
pub fn commutator_scaling_scan(
    u: &dyn Velocity,
    grid: Grid,
    times: &[f64],
    suite: &[Field],
    r: &Multiplier,
    ps: &[f64],
    dt: f64,
) -> Result<Vec<CommutatorRecord>> {
    let bank = FilterBank::new(grid)?;
    let params = BesovParams::critical(2);
    let base: Vec<(f64, Vec<f64>)> = suite
        .iter()
        .map(|w| Ok((bank.besov_norm(w, params)?, ps.iter().map(|&p| w.lp_norm(p)).collect())))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let phi = if t == 0.0 { FlowMap::identity(grid) } else { crate::flow::integrate_flow(u, grid, t, dt)? };
        let m = phi.m();
        if m > SMALL_MAP {
            return Err(Error::InvalidParameter(format!(
                "flow map at t = {t} has M = {m:.4}, outside the small-map regime M <= {SMALL_MAP}"
            )));
        }
        let mut besov_ratio = 0.0_f64;
        let mut lp = vec![0.0_f64; ps.len()];
        for (w, (b0, l0)) in suite.iter().zip(&base) {
            let c = commutator_apply(r, &phi, w)?;
            besov_ratio = besov_ratio.max(bank.besov_norm(&c, params)? / b0);
            for (k, &p) in ps.iter().enumerate() {
                lp[k] = lp[k].max(c.lp_norm(p) / l0[k]);
            }
        }
        out.push(CommutatorRecord { t, m, besov_ratio, lp_ratios: ps.iter().copied().zip(lp).collect() });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportRecord {
    pub t: f64,
    pub sup: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub records: Vec<TransportRecord>,
    pub checkpoints: Vec<(f64, Field)>,
    pub last: Field,
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    pub fn checkpoint(&self, t: f64) -> Option<&Field> {
        self.checkpoints.iter().find(|(s, _)| (s - t).abs() < 1e-9).map(|(_, f)| f)
    }
}

fn velocity_samples(u: &dyn Velocity, grid: &Grid, t: f64) -> Vec<Vec<f64>> {
    u.sample(grid, t).components.iter().map(|c| dealias(c).into_values()).collect()
}

/// Fails unless `f` is band-limited under the dealiasing cutoff.
pub fn check_band_limited(f: &Field) -> Result<()> {
    let grid = f.grid();
    let c = f.coeffs();
    let mut inside = 0.0_f64;
    let mut outside = 0.0_f64;
    for (idx, z) in c.iter().enumerate() {
        if grid.is_dealiased(idx) {
            inside = inside.max(z.norm());
        } else {
            outside = outside.max(z.norm());
        }
    }
    if outside > BAND_LIMIT_TOL * inside.max(f64::MIN_POSITIVE) {
        return Err(Error::Unresolved(format!(
            "initial data has coefficients of relative size {:.2e} beyond the dealiasing cutoff",
            outside / inside
        )));
    }
    Ok(())
}

/// Solves `f_t + u . grad f = R f` on `[0, t_end]` with integrating-factor RK4.
///
/// `observer` sees the state after every step (and the initial state as step
/// 0). Checkpoints are kept every `checkpoint_every` steps when nonzero.
pub fn solve_forced_transport_observed(
    f0: &Field,
    u: &dyn Velocity,
    r: &Multiplier,
    t_end: f64,
    dt: f64,
    checkpoint_every: usize,
    mut observer: impl FnMut(usize, f64, &Field) -> Result<()>,
) -> Result<Trajectory> {
    let grid = *f0.grid();
    check_band_limited(f0)?;
    let speed = u.sup_norm() * (grid.dim() as f64).sqrt();
    check_cfl(&grid, speed, dt)?;
    let (steps, h) = uniform_steps(t_end, dt);
    let stepper = IfRk4::new(&grid, r, h)?;
    let moving = u.sup_norm() > 0.0;
    let frozen = if u.is_stationary() && moving { Some(velocity_samples(u, &grid, 0.0)) } else { None };

    let mut c = f0.coeffs().into_owned();
    let mut state = f0.to_physical()?;
    let mut records = vec![TransportRecord { t: 0.0, sup: state.sup_norm() }];
    let mut checkpoints = Vec::new();
    if checkpoint_every > 0 {
        checkpoints.push((0.0, state.clone()));
    }
    observer(0, 0.0, &state)?;
    for k in 0..steps {
        let t = k as f64 * h;
        c = stepper.step(&c, t, |coeffs, s| {
            if !moving {
                return Ok(vec![Complex64::new(0.0, 0.0); coeffs.len()]);
            }
            let owned;
            let samples = match &frozen {
                Some(v) => v,
                None => {
                    owned = velocity_samples(u, &grid, s);
                    &owned
                }
            };
            let refs: Vec<&[f64]> = samples.iter().map(|v| v.as_slice()).collect();
            Ok(advection_coeffs(&grid, &refs, coeffs).into_iter().map(|z| -z).collect())
        })?;
        let t_next = (k + 1) as f64 * h;
        state = Field::from_coeffs(grid, c.clone())?.to_physical()?;
        let sup = state.sup_norm();
        if !(sup <= BLOW_UP) {
            return Err(Error::BlowUp { t: t_next, sup });
        }
        records.push(TransportRecord { t: t_next, sup });
        if checkpoint_every > 0 && (k + 1) % checkpoint_every == 0 {
            checkpoints.push((t_next, state.clone()));
        }
        observer(k + 1, t_next, &state)?;
    }
    Ok(Trajectory { dt: h, records, checkpoints, last: state })
}

pub fn solve_forced_transport(
    f0: &Field,
    u: &dyn Velocity,
    r: &Multiplier,
    t_end: f64,
    dt: f64,
    checkpoint_every: usize,
) -> Result<Trajectory> {
    solve_forced_transport_observed(f0, u, r, t_end, dt, checkpoint_every, |_, _, _| Ok(()))
}

/// Composite Simpson weights on `m` equal intervals (3/8 rule on the last
/// three when `m` is odd, trapezoid when `m = 1`), without the step factor.
pub fn simpson_weights(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    if m == 0 {
        return w;
    }
    if m == 1 {
        w[0] = 0.5;
        w[1] = 0.5;
        return w;
    }
    let even = if m % 2 == 0 { m } else { m - 3 };
    for k in (0..even).step_by(2) {
        w[k] += 1.0 / 3.0;
        w[k + 1] += 4.0 / 3.0;
        w[k + 2] += 1.0 / 3.0;
    }
    if m % 2 == 1 {
        for (j, c) in [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0].iter().enumerate() {
            w[even + j] += c;
        }
    }
    w
}

/// Accumulates both sides of the Duhamel identity along characteristics:
/// `f(t) o Phi(t) = exp(tR) f0 - int_0^t exp((t-s)R) [R,Phi(s)] f(s) ds`.
///
/// Characteristics start at every grid point and are advanced with RK4
/// alongside the solver.
pub struct DuhamelCheck<'a> {
    grid: Grid,
    velocity: &'a dyn Velocity,
    forcing: &'a Multiplier,
    symbol: Vec<Complex64>,
    h: f64,
    weights: Vec<f64>,
    positions: Vec<[f64; 2]>,
    initial: Vec<Complex64>,
    integral: Vec<Complex64>,
    observed: usize,
}

impl<'a> DuhamelCheck<'a> {
    pub fn new(f0: &Field, velocity: &'a dyn Velocity, forcing: &'a Multiplier, t_end: f64, dt: f64) -> Result<Self> {
        let grid = *f0.grid();
        if grid.dim() != 2 {
            return Err(Error::InvalidParameter("the Duhamel check runs on 2D grids".into()));
        }
        let (steps, h) = uniform_steps(t_end, dt);
        Ok(Self {
            grid,
            velocity,
            forcing,
            symbol: forcing.lattice(&grid)?,
            h,
            weights: simpson_weights(steps),
            positions: (0..grid.len()).map(|i| grid.point(i)).collect(),
            initial: f0.coeffs().into_owned(),
            integral: vec![Complex64::new(0.0, 0.0); grid.len()],
            observed: 0,
        })
    }

    fn compose(&self, values: &[f64]) -> Vec<f64> {
        let it = Interpolator::new(self.grid, vec![values]);
        self.positions.iter().map(|p| it.eval(p[0], p[1])).collect()
    }

    /// Feeds the solver state at step `k` (time `t = k h`).
    pub fn observe(&mut self, k: usize, t: f64, f: &Field) -> Result<()> {
        if k != self.observed || k >= self.weights.len() {
            return Err(Error::InvalidParameter(format!("Duhamel check expected step {}, got {k}", self.observed)));
        }
        let w = self.weights[k] * self.h;
        if w != 0.0 && k > 0 {
            let fv = f.values();
            let composed = Field::from_values(self.grid, self.compose(&fv))?;
            let rf = self.forcing.apply(f)?.into_values();
            let a = self.forcing.apply(&composed)?.into_coeffs();
            let b = Field::from_values(self.grid, self.compose(&rf))?.into_coeffs();
            for i in 0..self.grid.len() {
                let back = (-t * self.symbol[i]).exp();
                self.integral[i] += back * (a[i] - b[i]) * w;
            }
        }
        if k + 1 < self.weights.len() {
            let u = self.velocity;
            let h = self.h;
            for p in self.positions.iter_mut() {
                *p = crate::flow::rk4_step(u, *p, t, h);
            }
        }
        self.observed += 1;
        Ok(())
    }

    /// Sup-norm gap between the two sides once the final state has been observed.
    pub fn residual(&self, f_t: &Field) -> Result<f64> {
        if self.observed != self.weights.len() {
            return Err(Error::InvalidParameter("Duhamel check has not seen the whole run".into()));
        }
        let t = self.h * (self.weights.len() - 1) as f64;
        let lhs = self.compose(&f_t.values());
        let rhs_coeffs: Vec<Complex64> = (0..self.grid.len())
            .map(|i| (t * self.symbol[i]).exp() * (self.initial[i] - self.integral[i]))
            .collect();
        let rhs = Field::from_coeffs(self.grid, rhs_coeffs)?.into_values();
        Ok(lhs.iter().zip(&rhs).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

#[derive(Clone, Debug)]
pub struct DuhamelReport {
    pub residual: f64,
    pub dt: f64,
    pub trajectory: Trajectory,
}

/// Runs the solver and returns the sup-norm Duhamel residual at `t_end`.
pub fn duhamel_residual(f0: &Field, u: &dyn Velocity, r: &Multiplier, t_end: f64, dt: f64) -> Result<DuhamelReport> {
    let mut check = DuhamelCheck::new(f0, u, r, t_end, dt)?;
    let trajectory = solve_forced_transport_observed(f0, u, r, t_end, dt, 0, |k, t, f| check.observe(k, t, f))?;
    let residual = check.residual(&trajectory.last)?;
    Ok(DuhamelReport { residual, dt: trajectory.dt, trajectory })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBound {
    pub t: f64,
    /// `|f(t)|_inf`.
    pub measured: f64,
    /// `|f0 + t R f0|_inf`.
    pub linear: f64,
    /// `C t^2 (1 + |u|_Lip e^{C t |u|_Lip}) |f0|_B`.
    pub correction: f64,
    pub holds: bool,
}

fn critical_besov(f: &Field) -> Result<f64> {
    FilterBank::new(*f.grid())?.besov_norm(f, BesovParams::critical(f.grid().dim()))
}

fn linear_part(f0: &Field, r: &Multiplier, t: f64) -> Result<f64> {
    Ok(f0.combine(1.0, &r.apply(f0)?, t)?.sup_norm())
}

fn correction(constant: f64, t: f64, lip: f64, besov: f64) -> f64 {
    constant * t * t * (1.0 + lip * (constant * t * lip).exp()) * besov
}

/// Checks `|f(t)|_inf >= |f0 + tRf0|_inf - correction`.
pub fn lower_bound_check(
    f0: &Field,
    r: &Multiplier,
    u_lip: f64,
    t: f64,
    f_t: &Field,
    constant: f64,
) -> Result<LowerBound> {
    let measured = f_t.sup_norm();
    let linear = linear_part(f0, r, t)?;
    let corr = correction(constant, t, u_lip, critical_besov(f0)?);
    Ok(LowerBound { t, measured, linear, correction: corr, holds: measured >= linear - corr })
}

/// Smallest constant for which the lower bound holds on one sample.
pub fn lower_bound_constant(f0: &Field, r: &Multiplier, u_lip: f64, t: f64, f_t: &Field) -> Result<f64> {
    let deficit = linear_part(f0, r, t)? - f_t.sup_norm();
    if deficit <= 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let b = critical_besov(f0)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    while correction(hi, t, u_lip, b) < deficit {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidParameter("lower-bound deficit cannot be absorbed".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if correction(mid, t, u_lip, b) < deficit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `log(|f(t)|_B / |f0|_B) / (t |u|_Lip)` in the critical Besov space; the
/// growth bound holds with any constant at least this large.
pub fn besov_growth_exponent(f0: &Field, f_t: &Field, u_lip: f64, t: f64) -> Result<f64> {
    let ratio = critical_besov(f_t)? / critical_besov(f0)?;
    if t * u_lip == 0.0 {
        return Ok(if ratio <= 1.0 + 1e-12 { 0.0 } else { f64::INFINITY });
    }
    Ok(ratio.ln() / (t * u_lip))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_weights_integrate_cubics() {
        for m in 1..9 {
            let w = simpson_weights(m);
            let h = 1.0 / m as f64;
            let s: f64 = w.iter().enumerate().map(|(k, w)| w * h * (k as f64 * h).powi(if m == 1 { 1 } else { 3 })).sum();
            let exact = if m == 1 { 0.5 } else { 0.25 };
            assert!((s - exact).abs() < 1e-14, "m = {m}: {s}");
        }
    }
}
