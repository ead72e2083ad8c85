//! Periodic sixth-order (six-point stencil) Lagrange interpolation.

use crate::grid::Grid;

pub const ORDER: usize = 6;
const OFFSETS: [f64; ORDER] = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];

// prod_{k != m} (OFFSETS[m] - OFFSETS[k])
const DENOMS: [f64; ORDER] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];

fn weights(frac: f64) -> [f64; ORDER] {
    let d: [f64; ORDER] = std::array::from_fn(|k| frac - OFFSETS[k]);
    let mut left = [1.0; ORDER];
    let mut right = [1.0; ORDER];
    for k in 1..ORDER {
        left[k] = left[k - 1] * d[k - 1];
        right[ORDER - 1 - k] = right[ORDER - k] * d[ORDER - k];
    }
    std::array::from_fn(|m| left[m] * right[m] / DENOMS[m])
}

/// Base index (already shifted to the first stencil point) and weights along one axis.
fn stencil(grid: &Grid, x: f64) -> (i64, [f64; ORDER]) {
    let s = x / grid.spacing();
    let i0 = s.floor();
    (i0 as i64 - 2, weights(s - i0))
}

/// Values of every sampled field in `fields` at `(x, y)`; `y` is ignored on 1D grids.
pub fn eval_slices(grid: &Grid, fields: &[&[f64]], x: f64, y: f64, out: &mut [f64]) {
    let n = grid.n() as i64;
    let wrap = |i: i64| i.rem_euclid(n) as usize;
    let (bx, wx) = stencil(grid, x);
    out.iter_mut().for_each(|o| *o = 0.0);
    if grid.dim() == 1 {
        for (a, w) in wx.iter().enumerate() {
            let i = wrap(bx + a as i64);
            for (o, f) in out.iter_mut().zip(fields) {
                *o += w * f[i];
            }
        }
        return;
    }
    let (by, wy) = stencil(grid, y);
    let nu = n as usize;
    let cols: [usize; ORDER] = std::array::from_fn(|a| wrap(bx + a as i64));
    for (b, wyb) in wy.iter().enumerate() {
        let row = wrap(by + b as i64) * nu;
        for (o, f) in out.iter_mut().zip(fields) {
            let mut s = 0.0;
            for (a, wxa) in wx.iter().enumerate() {
                s += wxa * f[row + cols[a]];
            }
            *o += wyb * s;
        }
    }
}

/// Interpolates one or more sampled fields at arbitrary points.
pub struct Interpolator<'a> {
    grid: Grid,
    fields: Vec<&'a [f64]>,
}

impl<'a> Interpolator<'a> {
    pub fn new(grid: Grid, fields: Vec<&'a [f64]>) -> Self {
        Self { grid, fields }
    }

    /// Values of every field at `(x, y)`; `y` is ignored on 1D grids.
    pub fn eval_into(&self, x: f64, y: f64, out: &mut [f64]) {
        eval_slices(&self.grid, &self.fields, x, y, out);
    }

    /// Value of the first field at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut out = [0.0];
        eval_slices(&self.grid, &self.fields[..1], x, y, &mut out);
        out[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use std::f64::consts::PI;

    #[test]
    fn exact_at_nodes_and_for_low_degree() {
        let g = Grid::square(32, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x, y| (x + 2.0 * y).sin());
        let v = f.values();
        let it = Interpolator::new(g, vec![&v]);
        for idx in [0, 17, 500, 1023] {
            let [x, y] = g.point(idx);
            assert!((it.eval(x, y) - v[idx]).abs() < 1e-14);
        }
        let w = weights(0.37);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let cubic: f64 = w.iter().zip(OFFSETS).map(|(wi, o)| wi * o.powi(5)).sum();
        assert!((cubic - 0.37_f64.powi(5)).abs() < 1e-13);
    }

    #[test]
    fn smooth_function_accuracy() {
        let g = Grid::square(128, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x, y| x.sin() * (2.0 * y).cos());
        let v = f.values();
        let it = Interpolator::new(g, vec![&v]);
        let (x, y) = (1.2345, -2.2222);
        assert!((it.eval(x, y) - x.sin() * (2.0 * y).cos()).abs() < 1e-9);
    }
}
