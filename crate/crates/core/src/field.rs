use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;

/// Real scalar function sampled on a periodic grid.
///
/// Either representation may be absent; accessors compute the missing one on
/// demand and `to_spectral` / `to_physical` cache it.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    values: Option<Vec<f64>>,
    coeffs: Option<Vec<Complex64>>,
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_finite_complex(coeffs: &[Complex64]) -> Result<()> {
    match coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: Some(vec![0.0; grid.len()]), coeffs: Some(vec![Complex64::new(0.0, 0.0); grid.len()]) }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid, values: Some(values), coeffs: None })
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!("expected {} coefficients, got {}", grid.len(), coeffs.len())));
        }
        Ok(Self { grid, values: None, coeffs: Some(coeffs) })
    }

    /// Samples `f` at the centered grid coordinates (`y = 0` in 1D).
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let [x, y] = grid.point(idx);
                f(x, y)
            })
            .collect();
        Self { grid, values: Some(values), coeffs: None }
    }

    /// Builds the field whose coefficient at each lattice frequency is `c(xi)`.
    pub fn from_spectrum(grid: Grid, c: impl Fn([f64; 2]) -> Complex64) -> Self {
        let coeffs = (0..grid.len()).map(|idx| c(grid.frequency(idx))).collect();
        Self { grid, values: None, coeffs: Some(coeffs) }
    }

    /// Random real field band-limited to `|xi| <= cutoff`, normalized to unit sup norm.
    pub fn random_smooth(grid: Grid, cutoff: f64, mean_zero: bool, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<Complex64> = (0..grid.len())
            .map(|idx| {
                let xi = grid.frequency(idx);
                let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let ny = grid.nyquist_axes(idx);
                if r <= cutoff && !ny[0] && !ny[1] {
                    Complex64::new(re, im) * (-(r / cutoff).powi(2)).exp()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (idx, c) in coeffs.iter_mut().enumerate() {
            *c = 0.5 * (raw[idx] + raw[grid.negated_index(idx)].conj());
        }
        if mean_zero {
            coeffs[0] = Complex64::new(0.0, 0.0);
        }
        let field = Self { grid, values: None, coeffs: Some(coeffs) };
        let sup = field.sup_norm();
        if sup > 0.0 {
            field.scaled(1.0 / sup)
        } else {
            field
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn has_physical(&self) -> bool {
        self.values.is_some()
    }

    pub fn has_spectral(&self) -> bool {
        self.coeffs.is_some()
    }

    pub fn to_spectral(&self) -> Result<Field> {
        let mut out = self.clone();
        if out.coeffs.is_none() {
            let values = out.values.as_ref().expect("field without representation");
            check_finite(values)?;
            out.coeffs = Some(fft::forward(&self.grid, values));
        }
        Ok(out)
    }

    pub fn to_physical(&self) -> Result<Field> {
        let mut out = self.clone();
        if out.values.is_none() {
            let coeffs = out.coeffs.as_ref().expect("field without representation");
            check_finite_complex(coeffs)?;
            out.values = Some(fft::inverse(&self.grid, coeffs));
        }
        Ok(out)
    }

    /// Physical samples, transforming if needed.
    pub fn values(&self) -> Cow<'_, [f64]> {
        match &self.values {
            Some(v) => Cow::Borrowed(v),
            None => Cow::Owned(fft::inverse(&self.grid, self.coeffs.as_ref().expect("field without representation"))),
        }
    }

    /// Spectral coefficients, transforming if needed.
    pub fn coeffs(&self) -> Cow<'_, [Complex64]> {
        match &self.coeffs {
            Some(c) => Cow::Borrowed(c),
            None => Cow::Owned(fft::forward(&self.grid, self.values.as_ref().expect("field without representation"))),
        }
    }

    pub fn checked_coeffs(&self) -> Result<Cow<'_, [Complex64]>> {
        if let (None, Some(v)) = (&self.coeffs, &self.values) {
            check_finite(v)?;
        }
        Ok(self.coeffs())
    }

    pub fn into_values(self) -> Vec<f64> {
        match self.values {
            Some(v) => v,
            None => fft::inverse(&self.grid, self.coeffs.as_ref().expect("field without representation")),
        }
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        match self.coeffs {
            Some(c) => c,
            None => fft::forward(&self.grid, self.values.as_ref().expect("field without representation")),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.coeffs {
            Some(c) => c[0].re,
            None => {
                let v = self.values.as_ref().expect("field without representation");
                v.iter().sum::<f64>() / v.len() as f64
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(sum |f|^p h^d)^(1/p)`; `p = inf` gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_of(&self.values(), self.grid.cell_measure(), p)
    }

    /// Largest Euclidean gradient length over the grid.
    pub fn lipschitz(&self) -> f64 {
        let grad = crate::calculus::gradient(self);
        let comps: Vec<Vec<f64>> = grad.components.iter().map(|c| c.values().into_owned()).collect();
        (0..self.grid.len())
            .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest violation of `c(-k) = conj(c(k))` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let c = self.coeffs();
        let scale = c.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        (0..c.len())
            .map(|i| (c[i] - c[self.grid.negated_index(i)].conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Trigonometric interpolant evaluated at an arbitrary point.
    pub fn eval_at(&self, x: f64, y: f64) -> f64 {
        let c = self.coeffs();
        let mut acc = 0.0;
        for (idx, ck) in c.iter().enumerate() {
            if ck.re == 0.0 && ck.im == 0.0 {
                continue;
            }
            let ny = self.grid.nyquist_axes(idx);
            let xi = self.grid.frequency(idx);
            let phase = xi[0] * x + xi[1] * y;
            // Nyquist modes are real cosines on the grid; interpolate them symmetrically.
            let mut term = if ny[0] || ny[1] {
                let mut s = 0.0;
                let mut count = 0.0;
                let fx: &[f64] = if ny[0] { &[1.0, -1.0] } else { &[1.0] };
                let fy: &[f64] = if ny[1] { &[1.0, -1.0] } else { &[1.0] };
                for sx in fx {
                    for sy in fy {
                        let ph = sx * xi[0] * x + sy * xi[1] * y;
                        s += (ck * Complex64::new(ph.cos(), ph.sin())).re;
                        count += 1.0;
                    }
                }
                s / count
            } else {
                (ck * Complex64::new(phase.cos(), phase.sin())).re
            };
            if !term.is_finite() {
                term = 0.0;
            }
            acc += term;
        }
        acc
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.as_ref().map(|v| v.iter().map(|x| a * x).collect()),
            coeffs: self.coeffs.as_ref().map(|c| c.iter().map(|x| x * a).collect()),
        }
    }

    /// `a * self + b * other`, computed in whichever representation both share.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.grid.same_as(&other.grid)?;
        if let (Some(c1), Some(c2)) = (&self.coeffs, &other.coeffs) {
            let c = c1.iter().zip(c2).map(|(x, y)| x * a + y * b).collect();
            return Field::from_coeffs(self.grid, c);
        }
        let v1 = self.values();
        let v2 = other.values();
        let v = v1.iter().zip(v2.iter()).map(|(x, y)| a * x + b * y).collect();
        Field::from_values(self.grid, v)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, -1.0)
    }

    /// Pointwise product in physical space (no dealiasing).
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.grid.same_as(&other.grid)?;
        let v = self.values().iter().zip(other.values().iter()).map(|(x, y)| x * y).collect();
        Field::from_values(self.grid, v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: Some(self.values().iter().map(|&v| f(v)).collect()), coeffs: None }
    }

    /// Sup norm of `self - other`.
    pub fn distance(&self, other: &Field) -> f64 {
        self.values().iter().zip(other.values().iter()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn lp_norm_of(values: &[f64], measure: f64, p: f64) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    let inv = 1.0 / max;
    let s: f64 = if p.fract() == 0.0 && p <= 64.0 {
        let k = p as i32;
        values.iter().map(|v| (v.abs() * inv).powi(k)).sum()
    } else {
        values.iter().map(|v| (v.abs() * inv).powf(p)).sum()
    };
    max * (s * measure).powf(1.0 / p)
}

/// Vector field with one scalar [`Field`] per component.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub components: Vec<Field>,
}

impl VectorField {
    pub fn new(components: Vec<Field>) -> Self {
        Self { components }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    /// Largest Euclidean length over the grid.
    pub fn sup_norm(&self) -> f64 {
        let vals: Vec<Cow<[f64]>> = self.components.iter().map(|c| c.values()).collect();
        (0..self.grid().len())
            .map(|i| vals.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest pointwise operator 2-norm of the spectral Jacobian.
    pub fn lipschitz(&self) -> f64 {
        let jac = crate::calculus::jacobian(self);
        crate::calculus::max_operator_norm(&jac)
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        VectorField::new(self.components.iter().map(|c| c.scaled(a)).collect())
    }
}

impl Grid {
    /// Flat index of the frequency `-k`.
    pub fn negated_index(&self, idx: usize) -> usize {
        let n = self.n();
        let [ix, iy] = self.axis_indices(idx);
        let nx = (n - ix) % n;
        let ny = (n - iy) % n;
        self.flat_index(nx, ny)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_has_only_zero_mode() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |_, _| 1.0).to_spectral().unwrap();
        let c = f.coeffs();
        assert!((c[0].re - 1.0).abs() < 1e-15);
        assert!(c.iter().skip(1).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn single_sine_has_two_modes() {
        let l = 5.0;
        let g = Grid::square(32, l).unwrap();
        let f = Field::from_fn(g, |x, _| (2.0 * PI * x / l).sin());
        let c = f.coeffs();
        let big: Vec<usize> = (0..g.len()).filter(|&i| c[i].norm() > 1e-12).collect();
        assert_eq!(big.len(), 2);
        for i in big {
            let xi = g.frequency(i);
            assert!((xi[0].abs() - 2.0 * PI / l).abs() < 1e-12 && xi[1] == 0.0);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let g = Grid::line(8, 1.0).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        let f = Field::from_values(g, v).unwrap();
        assert!(matches!(f.to_spectral(), Err(Error::NonFinite { index: 3 })));
    }

    #[test]
    fn eval_at_matches_grid_samples() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let f = Field::random_smooth(g, 4.0, false, 3);
        let v = f.values();
        for idx in [0, 5, 77, 200] {
            let [x, y] = g.point(idx);
            assert!((f.eval_at(x, y) - v[idx]).abs() < 1e-12);
        }
    }
}
