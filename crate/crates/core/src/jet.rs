//! Bivariate Taylor jets truncated at total degree 4.
//!
//! A jet carries every partial derivative up to fourth order of an expression
//! in `(x, y)`, so closed-form constructions can be differentiated exactly.

use std::ops::{Add, Mul, Neg, Sub};

pub const DEGREE: usize = 4;
const LEN: usize = 15;

const fn slot(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Truncated Taylor polynomial `sum c_ij dx^i dy^j` around a base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Self { c }
    }

    /// The coordinate functions `x` and `y` at the base point `(x0, y0)`.
    pub fn variables(x0: f64, y0: f64) -> (Self, Self) {
        let mut x = Self::constant(x0);
        let mut y = Self::constant(y0);
        x.c[slot(1, 0)] = 1.0;
        y.c[slot(0, 1)] = 1.0;
        (x, y)
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `d^{i+j} / dx^i dy^j` at the base point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= DEGREE, "jet holds derivatives up to order {DEGREE}");
        self.c[slot(i, j)] * FACT[i] * FACT[j]
    }

    pub fn laplacian_derivative(&self, i: usize, j: usize) -> f64 {
        self.derivative(i + 2, j) + self.derivative(i, j + 2)
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|v| *v *= a);
        Self { c }
    }

    /// `f(self)` from the Taylor coefficients `t_k = f^(k)(a0)/k!`.
    fn compose(&self, t: [f64; DEGREE + 1]) -> Self {
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Self::constant(t[0]);
        let mut power = Self::constant(1.0);
        for tk in t.iter().skip(1) {
            power = power * h;
            out = out + power.scale(*tk);
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a = self.c[0];
        let mut t = [0.0; DEGREE + 1];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = (-1.0_f64).powi(k as i32) / a.powi(k as i32 + 1);
        }
        self.compose(t)
    }

    pub fn ln(&self) -> Self {
        let a = self.c[0];
        let mut t = [a.ln(), 0.0, 0.0, 0.0, 0.0];
        for (k, tk) in t.iter_mut().enumerate().skip(1) {
            *tk = (-1.0_f64).powi(k as i32 + 1) / (k as f64 * a.powi(k as i32));
        }
        self.compose(t)
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose([e, e, e / 2.0, e / 6.0, e / 24.0])
    }

    pub fn sqrt(&self) -> Self {
        let a = self.c[0];
        let s = a.sqrt();
        self.compose([s, 0.5 / s, -0.125 / (a * s), 0.0625 / (a * a * s), -0.039_062_5 / (a * a * a * s)])
    }

    pub fn div(&self, other: &Jet) -> Self {
        *self * other.recip()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.c.iter_mut().zip(o.c).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        self.c.iter_mut().zip(o.c).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, v: f64) -> Jet {
        self.c[0] += v;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, v: f64) -> Jet {
        self.scale(v)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; LEN];
        for d1 in 0..=DEGREE {
            for j1 in 0..=d1 {
                let a = self.c[slot(d1 - j1, j1)];
                if a == 0.0 {
                    continue;
                }
                for d2 in 0..=(DEGREE - d1) {
                    for j2 in 0..=d2 {
                        c[slot(d1 - j1 + d2 - j2, j1 + j2)] += a * o.c[slot(d2 - j2, j2)];
                    }
                }
            }
        }
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let (x, y) = Jet::variables(1.5, -0.5);
        let f = x * x * x * y + y * y;
        assert!((f.derivative(3, 1) - 6.0).abs() < 1e-14);
        assert!((f.derivative(1, 1) - 3.0 * 1.5 * 1.5).abs() < 1e-14);
        assert!((f.derivative(0, 2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn elementary_functions() {
        let (x, y) = Jet::variables(0.3, 0.7);
        let r = (x * x + y * y).sqrt();
        let e = (x * y).exp();
        let l = (x + y * 2.0).ln();
        let q = x.div(&(y + 1.0));
        let h = 1e-3;
        let fd = |f: &dyn Fn(f64, f64) -> f64| {
            (f(0.3 + h, 0.7 + h) - f(0.3 + h, 0.7 - h) - f(0.3 - h, 0.7 + h) + f(0.3 - h, 0.7 - h)) / (4.0 * h * h)
        };
        assert!((r.derivative(1, 1) - fd(&|a, b| (a * a + b * b).sqrt())).abs() < 2e-5);
        assert!((e.derivative(1, 1) - fd(&|a, b| (a * b).exp())).abs() < 2e-5);
        assert!((l.derivative(1, 1) - fd(&|a, b| (a + 2.0 * b).ln())).abs() < 2e-5);
        assert!((q.derivative(1, 1) - fd(&|a, b| a / (b + 1.0))).abs() < 2e-5);
        assert!((l.derivative(4, 0) + 6.0 / (0.3 + 1.4_f64).powi(4)).abs() < 1e-12);
    }
}
