//! Panel Gauss-Legendre quadrature in one and two dimensions.

use gauss_quad::GaussLegendre;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};

static RULES: Lazy<Mutex<HashMap<usize, Vec<(f64, f64)>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    RULES
        .lock()
        .expect("quadrature cache poisoned")
        .entry(order)
        .or_insert_with(|| {
            let deg = order.try_into().expect("quadrature order must be at least 2");
            GaussLegendre::new(deg).iter().map(|(x, w)| (*x, *w)).collect()
        })
        .clone()
}

fn rule_on(rule: &[(f64, f64)], a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Integral over `[a, b]` split into equal panels no wider than `max_width`.
pub fn panels_1d(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, max_width: f64, order: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let rule = gauss_legendre(order);
    let count = ((b - a).abs() / max_width).ceil().max(1.0) as usize;
    let h = (b - a) / count as f64;
    (0..count).map(|i| rule_on(&rule, a + i as f64 * h, a + (i + 1) as f64 * h, &mut f)).sum()
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn tensor(rule: &[(f64, f64)], f: &impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (cx, hx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
    let (cy, hy) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
    let mut s = 0.0;
    for &(u, wu) in rule {
        for &(v, wv) in rule {
            s += wu * wv * f(cx + hx * u, cy + hy * v);
        }
    }
    hx * hy * s
}

/// Adaptive tensor Gauss-Legendre on a rectangle: a low and a high order rule
/// are compared and the cell is quartered until they agree to `tol`.
pub fn adaptive_2d(f: &impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64, tol: f64, depth: u32) -> Estimate {
    let lo = gauss_legendre(10);
    let hi = gauss_legendre(16);
    let coarse = tensor(&lo, f, x0, x1, y0, y1);
    let fine = tensor(&hi, f, x0, x1, y0, y1);
    let err = (fine - coarse).abs();
    if err <= tol || depth == 0 {
        return Estimate { value: fine, error: err };
    }
    let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for (a, b, c, d) in [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)] {
        let e = adaptive_2d(f, a, b, c, d, tol / 4.0, depth - 1);
        total.value += e.value;
        total.error += e.error;
    }
    total
}

/// Integral over `[0, k]^2` on a mesh of cells no wider than `cell`, each refined adaptively.
pub fn meshed_2d(f: &impl Fn(f64, f64) -> f64, k: f64, cell: f64, tol: f64) -> Result<Estimate> {
    let count = (k / cell).ceil().max(1.0) as usize;
    let h = k / count as f64;
    let per_cell = tol / (count * count) as f64;
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for i in 0..count {
        for j in 0..count {
            let (x0, y0) = (i as f64 * h, j as f64 * h);
            let e = adaptive_2d(f, x0, x0 + h, y0, y0 + h, per_cell.max(1e-16), 12);
            total.value += e.value;
            total.error += e.error;
        }
    }
    if total.error > tol.max(1e-12 * total.value.abs()) * 10.0 {
        return Err(Error::Quadrature { value: total.value, estimate: total.error });
    }
    Ok(total)
}

/// Sine integral `Si(x) = int_0^x sin(t)/t dt`.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x <= 64.0 {
        return panels_1d(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0, x, 0.5, 20);
    }
    // Asymptotic auxiliary functions; the truncation error is below 1e-14 here.
    let x2 = x * x;
    let mut fa = 0.0;
    let mut ga = 0.0;
    let mut term_f = 1.0 / x;
    let mut term_g = 1.0 / x2;
    for k in 0..8 {
        fa += term_f;
        ga += term_g;
        let kf = (2 * k + 1) as f64;
        term_f *= -(kf * (kf + 1.0)) / x2;
        term_g *= -((kf + 1.0) * (kf + 2.0)) / x2;
    }
    std::f64::consts::FRAC_PI_2 - fa * x.cos() - ga * x.sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let v = panels_1d(|x| x.powi(5) - x, 0.0, 2.0, 0.7, 6);
        assert!((v - (64.0 / 6.0 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn sine_integral_values() {
        assert!((sine_integral(PI) - 1.851_937_051_982_466).abs() < 1e-13);
        assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-14);
        // continuity across the switch to the asymptotic branch
        assert!((sine_integral(64.0) - sine_integral(64.000_000_1)).abs() < 1e-8);
        assert!((sine_integral(1e6) - PI / 2.0).abs() < 2e-6);
    }

    #[test]
    fn adaptive_handles_corner() {
        // int_[0,1]^2 (x^2 y^2)/(x^2+y^2) has a non-analytic corner at the origin.
        let e = meshed_2d(&|x, y| if x == 0.0 && y == 0.0 { 0.0 } else { x * x * y * y / (x * x + y * y) }, 1.0, 0.5, 1e-12).unwrap();
        // reference value from the same integral in polar coordinates
        let polar = panels_1d(
            |th| {
                let rmax = if th < PI / 4.0 { 1.0 / th.cos() } else { 1.0 / th.sin() };
                (th.cos() * th.sin()).powi(2) * rmax.powi(4) / 4.0
            },
            0.0,
            PI / 2.0,
            PI / 64.0,
            20,
        );
        assert!((e.value - polar).abs() < 1e-11, "{} vs {}", e.value, polar);
    }
}
