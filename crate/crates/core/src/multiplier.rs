use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;

/// What a multiplier does to the zero Fourier mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroMode {
    Zero,
    Identity,
    /// Multiply the mean by a fixed value.
    Value(Complex64),
    /// Refuse fields whose mean exceeds `1e-10`; output mean is zero.
    Error,
}

type Symbol = dyn Fn([f64; 2]) -> Complex64 + Send + Sync;

/// Fourier multiplier `f -> F^{-1}(m(xi) F f)` on the periodic lattice.
///
/// On Nyquist lines the symbol is averaged over the two aliased frequencies,
/// which keeps the output real.
#[derive(Clone)]
pub struct Multiplier {
    name: String,
    symbol: Arc<Symbol>,
    zero_mode: ZeroMode,
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier").field("name", &self.name).field("zero_mode", &self.zero_mode).finish()
    }
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn norm2(xi: [f64; 2]) -> f64 {
    xi[0] * xi[0] + xi[1] * xi[1]
}

impl Multiplier {
    pub fn new(
        name: impl Into<String>,
        zero_mode: ZeroMode,
        symbol: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), symbol: Arc::new(symbol), zero_mode }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn zero_mode(&self) -> ZeroMode {
        self.zero_mode
    }

    pub fn identity() -> Self {
        Self::new("I", ZeroMode::Identity, |_| real(1.0))
    }

    pub fn zero() -> Self {
        Self::new("0", ZeroMode::Zero, |_| real(0.0))
    }

    /// Hilbert transform along the first axis, symbol `-i sgn(xi_1)`.
    pub fn hilbert() -> Self {
        Self::new("H", ZeroMode::Zero, |xi| -I * xi[0].signum())
    }

    /// Riesz transform `R_axis`, symbol `-i xi_axis / |xi|`; axes are 1-based.
    pub fn riesz(axis: usize) -> Result<Self> {
        check_axis(axis)?;
        Ok(Self::new(format!("R{axis}"), ZeroMode::Zero, move |xi| -I * xi[axis - 1] / norm2(xi).sqrt()))
    }

    /// `R_i R_j`, symbol `-xi_i xi_j / |xi|^2`; axes are 1-based.
    pub fn riesz_pair(i: usize, j: usize) -> Result<Self> {
        check_axis(i)?;
        check_axis(j)?;
        Ok(Self::new(format!("R{i}R{j}"), ZeroMode::Zero, move |xi| real(-xi[i - 1] * xi[j - 1] / norm2(xi))))
    }

    /// Partial derivative along `axis` (1-based).
    pub fn derivative(axis: usize) -> Result<Self> {
        check_axis(axis)?;
        Ok(Self::new(format!("d{axis}"), ZeroMode::Zero, move |xi| I * xi[axis - 1]))
    }

    pub fn laplacian() -> Self {
        Self::new("Lap", ZeroMode::Zero, |xi| real(-norm2(xi)))
    }

    /// `(-Lap)^{-1}`; refuses fields with nonzero mean.
    pub fn inverse_neg_laplacian() -> Self {
        Self::new("(-Lap)^-1", ZeroMode::Error, |xi| real(1.0 / norm2(xi)))
    }

    pub fn symbol(&self, xi: [f64; 2]) -> Complex64 {
        (self.symbol)(xi)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let s = self.symbol.clone();
        let zero_mode = match self.zero_mode {
            ZeroMode::Zero => ZeroMode::Zero,
            ZeroMode::Identity => ZeroMode::Value(real(a)),
            ZeroMode::Value(v) => ZeroMode::Value(v * a),
            ZeroMode::Error => ZeroMode::Error,
        };
        Self::new(format!("{a}*{}", self.name), zero_mode, move |xi| s(xi) * a)
    }

    /// `self` applied after `inner`.
    pub fn compose(&self, inner: &Multiplier) -> Self {
        let (a, b) = (self.symbol.clone(), inner.symbol.clone());
        let zero_mode = match (self.zero_mode, inner.zero_mode) {
            (ZeroMode::Error, _) | (_, ZeroMode::Error) => ZeroMode::Error,
            (ZeroMode::Zero, _) | (_, ZeroMode::Zero) => ZeroMode::Zero,
            (x, y) => ZeroMode::Value(zero_value(x) * zero_value(y)),
        };
        Self::new(format!("{}*{}", self.name, inner.name), zero_mode, move |xi| a(xi) * b(xi))
    }

    pub fn sum(&self, other: &Multiplier) -> Self {
        let (a, b) = (self.symbol.clone(), other.symbol.clone());
        let zero_mode = match (self.zero_mode, other.zero_mode) {
            (ZeroMode::Error, _) | (_, ZeroMode::Error) => ZeroMode::Error,
            (x, y) => ZeroMode::Value(zero_value(x) + zero_value(y)),
        };
        Self::new(format!("{}+{}", self.name, other.name), zero_mode, move |xi| a(xi) + b(xi))
    }

    /// `exp(t m)`; overflow is reported when the multiplier is applied.
    pub fn exp(&self, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("exponential time {t} is not finite")));
        }
        let s = self.symbol.clone();
        let zero_mode = match self.zero_mode {
            ZeroMode::Zero => ZeroMode::Identity,
            ZeroMode::Identity => ZeroMode::Value(real(t.exp())),
            ZeroMode::Value(v) => ZeroMode::Value((v * t).exp()),
            ZeroMode::Error => ZeroMode::Error,
        };
        Ok(Self::new(format!("exp({t}*{})", self.name), zero_mode, move |xi| (s(xi) * t).exp()))
    }

    /// Symbol at lattice index `idx`, averaged over aliases on Nyquist lines.
    pub fn lattice_symbol(&self, grid: &crate::grid::Grid, idx: usize) -> Complex64 {
        let xi = grid.frequency(idx);
        match grid.nyquist_axes(idx) {
            [false, false] => self.symbol(xi),
            [true, false] => 0.5 * (self.symbol(xi) + self.symbol([-xi[0], xi[1]])),
            [false, true] => 0.5 * (self.symbol(xi) + self.symbol([xi[0], -xi[1]])),
            [true, true] => {
                0.25 * (self.symbol(xi)
                    + self.symbol([-xi[0], xi[1]])
                    + self.symbol([xi[0], -xi[1]])
                    + self.symbol([-xi[0], -xi[1]]))
            }
        }
    }

    /// Lattice values with the zero-mode policy applied (`Error` maps to 0).
    pub fn lattice(&self, grid: &crate::grid::Grid) -> Result<Vec<Complex64>> {
        let mut out = vec![real(1.0); grid.len()];
        out[0] = match self.zero_mode {
            ZeroMode::Zero | ZeroMode::Error => real(0.0),
            ZeroMode::Identity => real(1.0),
            ZeroMode::Value(v) => v,
        };
        for (idx, o) in out.iter_mut().enumerate().skip(1) {
            let m = self.lattice_symbol(grid, idx);
            if !(m.re.is_finite() && m.im.is_finite()) {
                let xi = grid.frequency(idx);
                return Err(Error::NonFiniteSymbol { name: self.name.clone(), xi1: xi[0], xi2: xi[1] });
            }
            *o = m;
        }
        Ok(out)
    }

    /// Multiplies raw lattice coefficients in place.
    pub fn apply_coeffs(&self, grid: &crate::grid::Grid, coeffs: &mut [Complex64]) -> Result<()> {
        match self.zero_mode {
            ZeroMode::Zero => coeffs[0] = real(0.0),
            ZeroMode::Identity => {}
            ZeroMode::Value(v) => coeffs[0] *= v,
            ZeroMode::Error => {
                if coeffs[0].norm() > 1e-10 {
                    return Err(Error::NonZeroMean { mean: coeffs[0].re });
                }
                coeffs[0] = real(0.0);
            }
        }
        for (idx, c) in coeffs.iter_mut().enumerate().skip(1) {
            let m = self.lattice_symbol(grid, idx);
            if !(m.re.is_finite() && m.im.is_finite()) {
                let xi = grid.frequency(idx);
                return Err(Error::NonFiniteSymbol { name: self.name.clone(), xi1: xi[0], xi2: xi[1] });
            }
            *c *= m;
        }
        Ok(())
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        let mut coeffs = f.checked_coeffs()?.into_owned();
        self.apply_coeffs(f.grid(), &mut coeffs)?;
        Field::from_coeffs(*f.grid(), coeffs)
    }
}

fn zero_value(z: ZeroMode) -> Complex64 {
    match z {
        ZeroMode::Zero | ZeroMode::Error => real(0.0),
        ZeroMode::Identity => real(1.0),
        ZeroMode::Value(v) => v,
    }
}

fn check_axis(axis: usize) -> Result<()> {
    if axis == 1 || axis == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("axis {axis} not in {{1, 2}}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn hilbert_of_sine_is_minus_cosine() {
        let g = Grid::line(64, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x, _| x.sin());
        let h = Multiplier::hilbert().apply(&f).unwrap();
        let expect = Field::from_fn(g, |x, _| -x.cos());
        assert!(h.distance(&expect) < 1e-14);
    }

    #[test]
    fn riesz_squared_on_product_mode() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x, y| x.cos() * y.cos());
        let r = Multiplier::riesz_pair(2, 2).unwrap().apply(&f).unwrap();
        assert!(r.distance(&f.scaled(-0.5)) < 1e-14);
    }

    #[test]
    fn riesz_pair_on_axis_modes() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let m = Multiplier::riesz_pair(2, 2).unwrap();
        let fx = Field::from_fn(g, |x, _| x.cos());
        let fy = Field::from_fn(g, |_, y| y.cos());
        assert!(m.apply(&fx).unwrap().sup_norm() < 1e-15);
        assert!(m.apply(&fy).unwrap().distance(&fy.scaled(-1.0)) < 1e-14);
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let g = Grid::square(16, 3.0).unwrap();
        let f = Field::random_smooth(g, 8.0, false, 1);
        let e = Multiplier::riesz_pair(1, 2).unwrap().exp(0.0).unwrap();
        assert!(e.apply(&f).unwrap().distance(&f) < 1e-14);
    }

    #[test]
    fn exp_hilbert_quarter_turn() {
        let g = Grid::line(64, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x, _| x.sin());
        let e = Multiplier::hilbert().exp(PI / 2.0).unwrap().apply(&f).unwrap();
        assert!(e.distance(&Field::from_fn(g, |x, _| -x.cos())) < 1e-10);
    }

    #[test]
    fn exp_riesz_decays_vertical_mode() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |_, y| y.sin());
        let t = 0.7;
        let e = Multiplier::riesz_pair(2, 2).unwrap().exp(t).unwrap().apply(&f).unwrap();
        assert!(e.distance(&f.scaled((-t).exp())) < 1e-14);
    }

    #[test]
    fn overflow_names_frequency() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let f = Field::random_smooth(g, 4.0, true, 2);
        let m = Multiplier::laplacian().scaled(-1.0).exp(100.0).unwrap();
        match m.apply(&f) {
            Err(Error::NonFiniteSymbol { xi1, xi2, .. }) => assert!(xi1.abs() + xi2.abs() > 0.0),
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    #[test]
    fn inverse_laplacian_rejects_mean() {
        let g = Grid::square(16, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x, _| 1.0 + x.sin());
        assert!(matches!(Multiplier::inverse_neg_laplacian().apply(&f), Err(Error::NonZeroMean { .. })));
    }
}
