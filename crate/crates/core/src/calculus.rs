//! Spectral differential operators.
//!
//! Vorticity convention: `omega = d_y u1 - d_x u2`, which makes
//! `u = grad_perp (-Lap)^{-1} omega` with `grad_perp = (-d_y, d_x)` invert the
//! curl and turns the drag `(-u1, 0)` into the forcing `-d_y u1 = R2 R2 omega`.
//! It is the negative of the usual counterclockwise vorticity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{Field, VectorField};
use crate::grid::Grid;
use crate::multiplier::Multiplier;

fn derivative(f: &Field, axis: usize) -> Field {
    Multiplier::derivative(axis).expect("axis in range").apply(f).expect("derivative symbol is finite")
}

pub fn gradient(f: &Field) -> VectorField {
    VectorField::new((1..=f.grid().dim()).map(|a| derivative(f, a)).collect())
}

pub fn divergence(u: &VectorField) -> Field {
    let parts: Vec<Field> = u.components.iter().enumerate().map(|(a, c)| derivative(c, a + 1)).collect();
    parts.iter().skip(1).fold(parts[0].clone(), |acc, p| acc.add(p).expect("same grid"))
}

/// `d_y u1 - d_x u2` (see module docs for the sign).
pub fn vorticity(u: &VectorField) -> Field {
    derivative(&u.components[0], 2).sub(&derivative(&u.components[1], 1)).expect("same grid")
}

/// Stream function `(-Lap)^{-1} omega`.
pub fn stream_function(omega: &Field) -> Result<Field> {
    Multiplier::inverse_neg_laplacian().apply(omega)
}

/// Biot-Savart law `u = (-d_y psi, d_x psi)` with `psi = (-Lap)^{-1} omega`.
pub fn perp_grad_inv_laplacian(omega: &Field) -> Result<VectorField> {
    if omega.grid().dim() != 2 {
        return Err(Error::InvalidParameter("Biot-Savart needs a 2D grid".into()));
    }
    let psi = stream_function(omega)?;
    Ok(VectorField::new(vec![derivative(&psi, 2).scaled(-1.0), derivative(&psi, 1)]))
}

/// `jac[i][j] = d_j u_i`.
pub fn jacobian(u: &VectorField) -> Vec<Vec<Field>> {
    u.components.iter().map(|c| gradient(c).components).collect()
}

/// Largest pointwise operator 2-norm of a 1x1 or 2x2 matrix field.
pub fn max_operator_norm(jac: &[Vec<Field>]) -> f64 {
    let vals: Vec<Vec<Vec<f64>>> =
        jac.iter().map(|row| row.iter().map(|f| f.values().into_owned()).collect()).collect();
    let len = jac[0][0].grid().len();
    (0..len).map(|k| operator_norm_at(&vals, k)).fold(0.0, f64::max)
}

pub(crate) fn operator_norm_at(vals: &[Vec<Vec<f64>>], k: usize) -> f64 {
    if vals.len() == 1 && vals[0].len() == 1 {
        return vals[0][0][k].abs();
    }
    let (a, b, c, d) = (vals[0][0][k], vals[0][1][k], vals[1][0][k], vals[1][1][k]);
    operator_norm_2x2(a, b, c, d)
}

pub fn operator_norm_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let fro = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
    ((fro + disc) / 2.0).sqrt()
}

/// Zeroes every mode outside the 2/3 band.
pub fn dealias_coeffs(grid: &Grid, coeffs: &mut [Complex64]) {
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if !grid.is_dealiased(idx) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

pub fn dealias(f: &Field) -> Field {
    let mut c = f.coeffs().into_owned();
    dealias_coeffs(f.grid(), &mut c);
    Field::from_coeffs(*f.grid(), c).expect("length preserved")
}

/// Dealiased `u . grad f`.
pub fn advection(u: &VectorField, f: &Field) -> Result<Field> {
    let grid = *f.grid();
    if u.components.len() != grid.dim() {
        return Err(Error::InvalidParameter("velocity dimension does not match grid".into()));
    }
    let mut uv = Vec::with_capacity(grid.dim());
    for uc in &u.components {
        uc.grid().same_as(&grid)?;
        uv.push(dealias(uc).into_values());
    }
    let refs: Vec<&[f64]> = uv.iter().map(|v| v.as_slice()).collect();
    Field::from_coeffs(grid, advection_coeffs(&grid, &refs, &f.coeffs()))
}

/// Spectral coefficients of the dealiased `u . grad f` for physical velocity
/// samples `u` (assumed already band-limited) and coefficients `c` of `f`.
pub fn advection_coeffs(grid: &Grid, u: &[&[f64]], c: &[Complex64]) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(idx, &ck)| {
            if !grid.is_dealiased(idx) || !grid.nyquist_axes(idx).iter().all(|b| !b) {
                return Complex64::new(0.0, 0.0);
            }
            let xi = grid.frequency(idx);
            // d_x f + i d_y f packed into one complex transform
            i * xi[0] * ck - xi[1] * ck
        })
        .collect();
    fft::inverse_complex(grid, &mut z);
    let prod: Vec<f64> = if grid.dim() == 1 {
        z.iter().zip(u[0]).map(|(g, a)| g.re * a).collect()
    } else {
        z.iter().zip(u[0]).zip(u[1]).map(|((g, a), b)| g.re * a + g.im * b).collect()
    };
    let mut out = fft::forward(grid, &prod);
    dealias_coeffs(grid, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn biot_savart_of_zero_is_zero() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let u = perp_grad_inv_laplacian(&Field::zeros(g)).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
    }

    #[test]
    fn biot_savart_product_mode() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let w = Field::from_fn(g, |x, y| x.cos() * y.cos());
        let u = perp_grad_inv_laplacian(&w).unwrap();
        // psi = w/2, u = (-psi_y, psi_x)
        let u1 = Field::from_fn(g, |x, y| 0.5 * x.cos() * y.sin());
        let u2 = Field::from_fn(g, |x, y| -0.5 * x.sin() * y.cos());
        assert!(u.components[0].distance(&u1) < 1e-14);
        assert!(u.components[1].distance(&u2) < 1e-14);
        assert!(divergence(&u).sup_norm() < 1e-14);
        assert!(vorticity(&u).distance(&w) < 1e-14);
    }

    #[test]
    fn operator_norm_of_rotation_and_diagonal() {
        assert!((operator_norm_2x2(0.0, -1.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((operator_norm_2x2(3.0, 0.0, 0.0, -2.0) - 3.0).abs() < 1e-15);
    }
}
