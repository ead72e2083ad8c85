//! Explicit data: the `g_N` family, the cellular flow, the sign cross and the
//! `C^1` datum built from `Q log(x^2 + y^2)`.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::calculus::{jacobian, max_operator_norm};
use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::grid::Grid;
use crate::jet::Jet;
use crate::littlewood_paley::smooth_step;
use crate::multiplier::Multiplier;
use crate::quadrature::{meshed_2d, panels_1d, sine_integral, Estimate};

/// Fourier transform of the indicator of `[-1, 1]^2`: `4 sin(a) sin(b) / (a b)`.
pub fn box_indicator_spectrum(a: f64, b: f64) -> f64 {
    4.0 * sinc(a) * sinc(b)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `(1 - cos x) / x`, written to stay accurate near 0.
fn versine_ratio(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        let s = (0.5 * x).sin();
        2.0 * s * s / x
    }
}

/// Fourier transform of `sgn(x) sgn(y)` on `[-1, 1]^2`:
/// `-4 (1 - cos a)(1 - cos b) / (a b)`. The transform is real.
pub fn odd_odd_indicator_spectrum(a: f64, b: f64) -> f64 {
    -4.0 * versine_ratio(a) * versine_ratio(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Truncation {
    /// Keep frequencies in the square of half-width `2^N`.
    Sharp,
    /// Weight the same square by the tensor Fejer kernel `(1 - |z1|/K)(1 - |z2|/K)`.
    Fejer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// The odd-odd square aligned with the axes; `R1 R2` sees its corner.
    Axis,
    /// The square rotated by 45 degrees; `R2 R2` sees its corner.
    Diagonal,
}

impl Orientation {
    /// Frequency in the datum's own frame.
    pub fn to_frame(&self, xi: [f64; 2]) -> [f64; 2] {
        match self {
            Orientation::Axis => xi,
            Orientation::Diagonal => [(xi[0] + xi[1]) / SQRT_2, (xi[1] - xi[0]) / SQRT_2],
        }
    }

    /// The Riesz composition that is logarithmically unbounded on this datum.
    pub fn singular_operator(&self) -> Multiplier {
        match self {
            Orientation::Axis => Multiplier::riesz_pair(1, 2),
            Orientation::Diagonal => Multiplier::riesz_pair(2, 2),
        }
        .expect("valid axes")
    }

    fn reach(&self) -> f64 {
        match self {
            Orientation::Axis => 1.0,
            Orientation::Diagonal => SQRT_2,
        }
    }
}

/// Provenance of a generated datum.
#[derive(Clone, Debug, Serialize)]
pub struct GnManifest {
    pub n: u32,
    pub truncation: Truncation,
    pub orientation: Orientation,
    pub points: usize,
    pub period: f64,
    pub sup_norm: f64,
}

/// Frequency truncation of the odd-odd unit square at scale `2^N`.
#[derive(Clone, Debug)]
pub struct GnDatum {
    pub n: u32,
    pub truncation: Truncation,
    pub orientation: Orientation,
    pub field: Field,
    pub sup_norm: f64,
}

impl GnDatum {
    pub fn manifest(&self) -> GnManifest {
        let g = self.field.grid();
        GnManifest {
            n: self.n,
            truncation: self.truncation,
            orientation: self.orientation,
            points: g.n(),
            period: g.period(),
            sup_norm: self.sup_norm,
        }
    }

    /// The datum rescaled to sup norm `eps`.
    pub fn normalized(&self, eps: f64) -> Field {
        self.field.scaled(eps / self.sup_norm)
    }
}

pub fn make_gn(n: u32, grid: Grid, truncation: Truncation, orientation: Orientation) -> Result<GnDatum> {
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter("g_N lives on a 2D grid".into()));
    }
    let k = 2.0_f64.powi(n as i32);
    if orientation.reach() * k >= grid.nyquist() {
        return Err(Error::Unresolved(format!(
            "N = {n} needs frequencies up to {:.1} but the Nyquist frequency is {:.1}",
            orientation.reach() * k,
            grid.nyquist()
        )));
    }
    if orientation.reach() >= grid.period() / 2.0 {
        return Err(Error::Unresolved(format!("period {} cannot hold the unit square", grid.period())));
    }
    let area = grid.domain_measure();
    let field = Field::from_spectrum(grid, |xi| {
        let z = orientation.to_frame(xi);
        if z[0].abs() > k || z[1].abs() > k {
            return Complex64::new(0.0, 0.0);
        }
        let w = match truncation {
            Truncation::Sharp => 1.0,
            Truncation::Fejer => (1.0 - z[0].abs() / k) * (1.0 - z[1].abs() / k),
        };
        Complex64::new(w * odd_odd_indicator_spectrum(z[0], z[1]) / area, 0.0)
    })
    .to_physical()?;
    let sup_norm = field.sup_norm();
    Ok(GnDatum { n, truncation, orientation, field, sup_norm })
}

fn corner_integrand(a: f64, b: f64) -> f64 {
    let r2 = a * a + b * b;
    if r2 == 0.0 {
        return 0.0;
    }
    let (sa, sb) = (a.sin(), b.sin());
    sa * sa * sb * sb / r2
}

const DIRECT_LIMIT: u32 = 10;

/// `int_{[-2^N, 2^N]^2} sin^2(a) sin^2(b) / (a^2 + b^2)`.
///
/// Up to `2^10` the square is meshed in cells of width `pi/2` and refined
/// adaptively. Beyond that the outer square annulus is written as
/// `(1 - cos 2a - cos 2b + cos 2a cos 2b) / (4 r^2)`: the first term integrates
/// to `2 pi log(K/K0)`, the single-cosine terms reduce to one-dimensional
/// integrals, and the doubly oscillating term is `O(K0^-2)` and enters the
/// error estimate.
pub fn rg_pointwise_quadrature_estimate(n: u32) -> Result<Estimate> {
    if n > 20 {
        return Err(Error::InvalidParameter(format!("N = {n} exceeds 20")));
    }
    let direct = |m: u32| -> Result<Estimate> {
        let k = 2.0_f64.powi(m as i32);
        let e = meshed_2d(&corner_integrand, k, PI / 2.0, 1e-11 * k.max(1.0))?;
        Ok(Estimate { value: 4.0 * e.value, error: 4.0 * e.error })
    };
    if n <= DIRECT_LIMIT {
        return direct(n);
    }
    let inner = direct(DIRECT_LIMIT)?;
    let k0 = 2.0_f64.powi(DIRECT_LIMIT as i32);
    let k = 2.0_f64.powi(n as i32);
    let log_term = 2.0 * PI * (k / k0).ln();
    // int over the annulus of cos(2a)/(a^2+b^2), integrating b in closed form
    let strip = |a: f64| -> f64 {
        let a = a.abs();
        let full = |bmax: f64| if a == 0.0 { -2.0 / bmax } else { 2.0 * (bmax / a).atan() / a };
        let w = if a >= k0 {
            full(k)
        } else if a == 0.0 {
            2.0 * (1.0 / k0 - 1.0 / k)
        } else {
            full(k) - full(k0)
        };
        (2.0 * a).cos() * w
    };
    let single = 2.0 * (panels_1d(strip, 0.0, k0, PI / 4.0, 16) + panels_1d(strip, k0, k, PI / 4.0, 16));
    let value = inner.value + 0.25 * (log_term - 2.0 * single);
    Ok(Estimate { value, error: inner.error + 1.0 / (k0 * k0) })
}

pub fn rg_pointwise_quadrature(n: u32) -> Result<f64> {
    Ok(rg_pointwise_quadrature_estimate(n)?.value)
}

/// Exact value at the origin of the singular response of the sharp `g_N` on
/// the whole plane: `(4/pi^2) * rg_pointwise_quadrature(N - 1)`.
pub fn gn_origin_response(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    Ok(4.0 / (PI * PI) * rg_pointwise_quadrature(n - 1)?)
}

/// Location and value of the largest `|int_a^b sin(t)/t dt|` over a grid of endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletSup {
    pub value: f64,
    pub a: f64,
    pub b: f64,
}

/// Scans endpoints in `[-16 pi, 16 pi]` with step `pi/16`.
pub fn dirichlet_kernel_sup() -> DirichletSup {
    let steps = 512;
    let h = PI / 16.0;
    let nodes: Vec<f64> = (0..=steps).map(|i| (i as f64 - steps as f64 / 2.0) * h).collect();
    let si: Vec<f64> = nodes.iter().map(|&x| sine_integral(x)).collect();
    let mut best = DirichletSup { value: 0.0, a: 0.0, b: 0.0 };
    for i in 0..nodes.len() {
        for j in i..nodes.len() {
            let v = (si[j] - si[i]).abs();
            if v > best.value {
                best = DirichletSup { value: v, a: nodes[i], b: nodes[j] };
            }
        }
    }
    best
}

fn require_multiple_of_two_pi(grid: &Grid) -> Result<()> {
    let m = grid.period() / (2.0 * PI);
    if (m - m.round()).abs() > 1e-12 || m.round() < 1.0 {
        return Err(Error::InvalidParameter(format!("period {} is not a multiple of 2 pi", grid.period())));
    }
    Ok(())
}

/// `(sin x cos y, -cos x sin y)`, a stationary Euler flow.
pub fn cellular_flow(grid: Grid) -> Result<VectorField> {
    require_multiple_of_two_pi(&grid)?;
    Ok(VectorField::new(vec![
        Field::from_fn(grid, |x, y| x.sin() * y.cos()),
        Field::from_fn(grid, |x, y| -x.cos() * y.sin()),
    ]))
}

/// Vorticity of [`cellular_flow`] in the crate convention: `-2 sin x sin y`.
pub fn cellular_vorticity(grid: Grid) -> Result<Field> {
    require_multiple_of_two_pi(&grid)?;
    Ok(Field::from_fn(grid, |x, y| -2.0 * x.sin() * y.sin()))
}

fn smooth_sign(x: f64, width: f64) -> f64 {
    2.0 * smooth_step((x + width) / (2.0 * width)) - 1.0
}

/// Mollified `sgn(x) sgn(y)` on the torus; each sign change is smoothed over
/// `[-smoothing, smoothing]`, including the ones at `+-L/2`.
pub fn yudovich_cross(grid: Grid, smoothing: f64) -> Result<Field> {
    if smoothing < 2.0 * grid.spacing() {
        return Err(Error::Unresolved(format!(
            "smoothing {smoothing} is below two grid cells ({})",
            2.0 * grid.spacing()
        )));
    }
    let half = grid.period() / 2.0;
    let s = move |x: f64| smooth_sign(x, smoothing) * smooth_sign(half - x.abs(), smoothing);
    Ok(Field::from_fn(grid, move |x, y| s(x) * s(y)))
}

/// `x^4 + y^4 - 6 x^2 y^2`.
pub fn harmonic_q(x: f64, y: f64) -> f64 {
    let (x2, y2) = (x * x, y * y);
    x2 * x2 + y2 * y2 - 6.0 * x2 * y2
}

/// `(Q_xx, Q_yy)` in closed form.
pub fn harmonic_q_second_derivatives(x: f64, y: f64) -> (f64, f64) {
    let (a, b) = (12.0 * x * x, 12.0 * y * y);
    (a - b, b - a)
}

fn reg_eps(reg: Option<u32>) -> f64 {
    reg.map_or(0.0, |n| 2.0_f64.powi(-(n as i32)))
}

/// `Q log(x^2 + y^2 + 2^-reg)`; `None` leaves the logarithm unregularized.
pub fn log_g(x: f64, y: f64, reg: Option<u32>) -> f64 {
    harmonic_q(x, y) * (x * x + y * y + reg_eps(reg)).ln()
}

/// Closed form of `d_xxyy (Q log(x^2+y^2))` away from the origin.
pub fn log_g_dxxyy(x: f64, y: f64) -> f64 {
    let (x2, y2) = (x * x, y * y);
    let rho = x2 + y2;
    let num = -17.0 * x2.powi(4) - 68.0 * x2.powi(3) * y2 + 90.0 * x2 * x2 * y2 * y2 - 68.0 * x2 * y2.powi(3)
        - 17.0 * y2.powi(4);
    -24.0 * rho.ln() + 4.0 * num / rho.powi(4)
}

fn jet_log_g(x: Jet, y: Jet, eps: f64) -> Jet {
    let (x2, y2) = (x * x, y * y);
    let q = x2 * x2 + y2 * y2 - x2 * y2 * 6.0;
    q * (x2 + y2 + eps).ln()
}

/// Every derivative of `Q log(x^2+y^2+eps)` up to order four at a point.
pub fn log_g_jet(x: f64, y: f64, reg: Option<u32>) -> Jet {
    let (jx, jy) = Jet::variables(x, y);
    jet_log_g(jx, jy, reg_eps(reg))
}

/// Cutoff equal to 1 on the unit disc and 0 outside the disc of radius 2.
pub fn disc_cutoff(r: f64) -> f64 {
    1.0 - smooth_step(r - 1.0)
}

fn jet_cutoff(x: Jet, y: Jet) -> Jet {
    let r = (x * x + y * y).value().sqrt();
    if r <= 1.0 {
        return Jet::constant(1.0);
    }
    if r >= 2.0 {
        return Jet::constant(0.0);
    }
    let t = (x * x + y * y).sqrt() + (-1.0);
    let b1 = (-t.recip()).exp();
    let b2 = (-((-t) + 1.0).recip()).exp();
    -(b1.div(&(b1 + b2))) + 1.0
}

/// Second derivatives `(xx, xy, yy)` of `Lap G` at a point.
pub fn laplace_g_hessian(x: f64, y: f64, reg: Option<u32>) -> (f64, f64, f64) {
    let j = log_g_jet(x, y, reg);
    (j.laplacian_derivative(2, 0), j.laplacian_derivative(1, 1), j.laplacian_derivative(0, 2))
}

/// Fourth-order central difference for `d_xxyy f`.
pub fn fd_dxxyy(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
    const W: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
    let mut s = 0.0;
    for (i, wi) in W.iter().enumerate() {
        for (j, wj) in W.iter().enumerate() {
            s += wi * wj * f(x + (i as f64 - 2.0) * h, y + (j as f64 - 2.0) * h);
        }
    }
    s / h.powi(4)
}

#[derive(Clone, Debug, Serialize)]
pub struct C1Manifest {
    pub delta: f64,
    pub eta: f64,
    pub reg: u32,
    pub points: usize,
    pub period: f64,
    pub grad_sup: f64,
}

/// Velocity `delta grad_perp Lap(chi G) + eta (y, 0) chi-cut`, with `grad_perp = (-d_y, d_x)`.
///
/// The shear part uses the stream function `-y^2 chi / 2` so that it equals
/// `eta (y, 0)` on the unit disc. Velocity and gradient are evaluated exactly
/// from jets.
#[derive(Clone, Debug)]
pub struct C1Datum {
    pub delta: f64,
    pub eta: f64,
    pub reg: u32,
    pub u: VectorField,
    /// `grad_u[i][j] = d_j u_i`.
    pub grad_u: Vec<Vec<Field>>,
    pub q: Field,
    pub g: Field,
}

/// Velocity and gradient of the `C^1` datum at one point.
pub fn c1_velocity_at(x: f64, y: f64, delta: f64, eta: f64, reg: u32) -> ([f64; 2], [[f64; 2]; 2]) {
    if x * x + y * y >= 4.0 {
        return ([0.0; 2], [[0.0; 2]; 2]);
    }
    let (jx, jy) = Jet::variables(x, y);
    let cut = jet_cutoff(jx, jy);
    let chi_g = cut * jet_log_g(jx, jy, reg_eps(Some(reg)));
    let shear = cut * (jy * jy) * (-0.5);
    let d = |i: usize, j: usize| delta * chi_g.laplacian_derivative(i, j) + eta * shear.derivative(i, j);
    let u = [-d(0, 1), d(1, 0)];
    let grad = [[-d(1, 1), -d(0, 2)], [d(2, 0), d(1, 1)]];
    (u, grad)
}

pub fn make_c1_datum(delta: f64, eta: f64, reg: u32, grid: Grid) -> Result<C1Datum> {
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter("the C1 datum lives on a 2D grid".into()));
    }
    let h = grid.spacing();
    if grid.period() / 2.0 <= 2.0 + 4.0 * h || h > 0.05 {
        return Err(Error::Unresolved(format!(
            "period {} with spacing {h} cannot hold the disc of radius 2",
            grid.period()
        )));
    }
    let len = grid.len();
    let mut u = vec![vec![0.0; len]; 2];
    let mut du = vec![vec![vec![0.0; len]; 2]; 2];
    for idx in 0..len {
        let [x, y] = grid.point(idx);
        let (v, gv) = c1_velocity_at(x, y, delta, eta, reg);
        for i in 0..2 {
            u[i][idx] = v[i];
            for j in 0..2 {
                du[i][j][idx] = gv[i][j];
            }
        }
    }
    let to_field = |v: Vec<f64>| Field::from_values(grid, v);
    let u = VectorField::new(u.into_iter().map(to_field).collect::<Result<_>>()?);
    let grad_u = du
        .into_iter()
        .map(|row| row.into_iter().map(to_field).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let q = Field::from_fn(grid, harmonic_q);
    let g = Field::from_fn(grid, move |x, y| log_g(x, y, Some(reg)));
    Ok(C1Datum { delta, eta, reg, u, grad_u, q, g })
}

impl C1Datum {
    pub fn grad_sup(&self) -> f64 {
        max_operator_norm(&self.grad_u)
    }

    pub fn manifest(&self) -> C1Manifest {
        let g = self.u.grid();
        C1Manifest {
            delta: self.delta,
            eta: self.eta,
            reg: self.reg,
            points: g.n(),
            period: g.period(),
            grad_sup: self.grad_sup(),
        }
    }

    pub fn jacobian_determinant(&self) -> Field {
        let g = &self.grad_u;
        g[0][0].mul(&g[1][1]).unwrap().sub(&g[0][1].mul(&g[1][0]).unwrap()).unwrap()
    }

    /// Vorticity `d_y u1 - d_x u2` from the exact gradient.
    pub fn vorticity(&self) -> Field {
        self.grad_u[0][1].sub(&self.grad_u[1][0]).expect("same grid")
    }
}

/// Full contraction `sum_{l,k} d_k u_l d_l u_k` of a velocity gradient; for a
/// divergence-free 2D field it equals `-2 det(grad u)`, and `-Lap p` equals it.
pub fn pressure_source_from_jacobian(grad: &[Vec<Field>]) -> Field {
    let d = grad.len();
    let len = grad[0][0].grid().len();
    let vals: Vec<Vec<Vec<f64>>> = grad.iter().map(|r| r.iter().map(|f| f.values().into_owned()).collect()).collect();
    let mut out = vec![0.0; len];
    for (idx, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for l in 0..d {
            for k in 0..d {
                s += vals[l][k][idx] * vals[k][l][idx];
            }
        }
        *o = s;
    }
    Field::from_values(*grad[0][0].grid(), out).expect("length preserved")
}

/// Pressure source of a velocity field, with the gradient taken spectrally.
pub fn bilinear_pressure_source(u: &VectorField) -> Field {
    pressure_source_from_jacobian(&jacobian(u))
}

/// `D^2 p = R_i R_j s` for the source `s = -Lap p`.
pub fn pressure_hessian(source: &Field) -> Result<Vec<Vec<Field>>> {
    (1..=2)
        .map(|i| (1..=2).map(|j| Multiplier::riesz_pair(i, j)?.apply(source)).collect())
        .collect()
}

/// Pointwise Frobenius norm of a matrix field.
pub fn frobenius(m: &[Vec<Field>]) -> Field {
    let grid = *m[0][0].grid();
    let vals: Vec<Vec<f64>> = m.iter().flatten().map(|f| f.values().into_owned()).collect();
    let out = (0..grid.len()).map(|i| vals.iter().map(|v| v[i] * v[i]).sum::<f64>().sqrt()).collect();
    Field::from_values(grid, out).expect("length preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_spectrum_examples() {
        assert_eq!(box_indicator_spectrum(0.0, 0.0), 4.0);
        assert!(box_indicator_spectrum(PI, 0.3).abs() < 1e-15);
        assert!((box_indicator_spectrum(1.0, 1.0) - 4.0 * 1f64.sin().powi(2)).abs() < 1e-15);
        assert!((box_indicator_spectrum(1.0, 1.0) - 2.8323).abs() < 1e-4);
    }

    #[test]
    fn q_examples() {
        assert_eq!(harmonic_q(1.0, 1.0), -4.0);
        let (a, b) = harmonic_q_second_derivatives(0.3, -1.7);
        assert_eq!(a + b, 0.0);
    }

    #[test]
    fn cellular_needs_two_pi_period() {
        assert!(cellular_flow(Grid::square(16, 5.0).unwrap()).is_err());
        let u = cellular_flow(Grid::square(16, 4.0 * PI).unwrap()).unwrap();
        assert_eq!(u.components[0].values()[0], 0.0);
        assert_eq!(u.components[1].values()[0], 0.0);
    }

    #[test]
    fn cross_basic_properties() {
        let g = Grid::square(64, 2.0 * PI).unwrap();
        assert!(yudovich_cross(g, g.spacing()).is_err());
        let w = yudovich_cross(g, 4.0 * g.spacing()).unwrap();
        assert!(w.sup_norm() <= 1.0);
        assert!(w.mean().abs() < 1e-14);
        let v = w.values();
        let idx = g.flat_index(8, 8);
        assert!((v[idx] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gn_rejects_unresolved() {
        let g = Grid::square(64, 4.0 * PI).unwrap();
        assert!(make_gn(5, g, Truncation::Sharp, Orientation::Diagonal).is_err());
        assert!(make_gn(3, g, Truncation::Sharp, Orientation::Diagonal).is_ok());
    }
}
