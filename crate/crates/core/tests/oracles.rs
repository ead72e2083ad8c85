//! Independent oracles for the quadrature-backed quantities, with frozen values.

use std::f64::consts::PI;

use inflation_core::counterexamples::{
    box_indicator_spectrum, dirichlet_kernel_sup, gn_origin_response, odd_odd_indicator_spectrum,
    rg_pointwise_quadrature,
};

/// `int_{[-K, K]^2} sin^2(a) sin^2(b) / (a^2 + b^2)` by composite Simpson on
/// the quarter square.
fn simpson_q(k: f64, per_unit: usize) -> f64 {
    let n = 2 * ((k * per_unit as f64).ceil() as usize / 2).max(1);
    let h = k / n as f64;
    let w = |i: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
    let sq: Vec<f64> = (0..=n).map(|i| (i as f64 * h).sin().powi(2)).collect();
    let mut s = 0.0;
    for i in 0..=n {
        let a = i as f64 * h;
        let mut row = 0.0;
        for j in 0..=n {
            let b = j as f64 * h;
            let r2 = a * a + b * b;
            if r2 > 0.0 {
                row += w(j) * sq[i] * sq[j] / r2;
            }
        }
        s += w(i) * row;
    }
    4.0 * s * h * h / 9.0
}

const FROZEN_Q: [(u32, f64); 6] = [
    (0, 0.30456912189274066),
    (1, 1.8194246549000235),
    (2, 2.5311717827593223),
    (3, 3.820106662243486),
    (4, 4.865539415554771),
    (5, 5.956872455667217),
];

#[test]
fn simpson_oracle_matches_frozen_values() {
    for &(n, q) in &FROZEN_Q {
        let v = simpson_q(2f64.powi(n as i32), 200);
        assert!((v - q).abs() <= 1e-8 * q, "N = {n}: {v} vs {q}");
    }
}

#[test]
fn library_quadrature_matches_frozen_values() {
    for &(n, q) in &FROZEN_Q {
        let v = rg_pointwise_quadrature(n).unwrap();
        assert!((v - q).abs() <= 1e-9 * q, "N = {n}: {v} vs {q}");
    }
}

#[test]
fn origin_response_scales_the_quadrature() {
    for &(n, q) in &FROZEN_Q[..5] {
        let v = gn_origin_response(n + 1).unwrap();
        assert!((v - 4.0 / (PI * PI) * q).abs() <= 1e-12 * q);
    }
    assert!(gn_origin_response(0).is_err());
}

#[test]
fn quadrature_grows_like_half_pi_log_k() {
    // each doubling of K adds (pi/2) ln 2 asymptotically
    let step = PI / 2.0 * 2f64.ln();
    let d = rg_pointwise_quadrature(14).unwrap() - rg_pointwise_quadrature(13).unwrap();
    assert!((d - step).abs() < 1e-3, "{d} vs {step}");
}

/// `int_{-1}^1 int_{-1}^1 w(x, y) e^{-i(a x + b y)}` by tensor Simpson.
fn transform_oracle(w: impl Fn(f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 2000;
    let h = 2.0 / n as f64;
    let wt = |i: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
    let mut re = 0.0;
    for i in 0..=n {
        let x = -1.0 + i as f64 * h;
        for j in 0..=n {
            let y = -1.0 + j as f64 * h;
            re += wt(i) * wt(j) * w(x, y) * (a * x + b * y).cos();
        }
    }
    re * h * h / 9.0
}

#[test]
fn box_spectrum_matches_direct_integration() {
    for &(a, b) in &[(0.0, 0.0), (0.7, -1.3), (3.0, 2.0)] {
        let direct = transform_oracle(|_, _| 1.0, a, b);
        assert!((direct - box_indicator_spectrum(a, b)).abs() < 1e-9);
    }
}

#[test]
fn odd_odd_spectrum_matches_direct_integration() {
    // the transform of sgn(x) sgn(y) is -(int sgn(x) sin(a x)) (int sgn(y) sin(b y)), real
    for &(a, b) in &[(0.5, 0.5), (1.7, -2.2), (4.0, 1.0)] {
        let sx = |a: f64| 2.0 * (1.0 - a.cos()) / a;
        let exact = -sx(a) * sx(b);
        assert!((exact - odd_odd_indicator_spectrum(a, b)).abs() < 1e-13);
        let direct = {
            let n = 4000;
            let h = 1.0 / n as f64;
            let wt = |i: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let one = |c: f64| 2.0 * (0..=n).map(|i| wt(i) * (c * i as f64 * h).sin()).sum::<f64>() * h / 3.0;
            -one(a) * one(b)
        };
        assert!((direct - exact).abs() < 1e-10);
    }
}

#[test]
fn dirichlet_sup_is_twice_si_pi() {
    let si_pi = 1.851_937_051_982_466_2;
    let s = dirichlet_kernel_sup();
    assert!((s.value - 2.0 * si_pi).abs() < 1e-10, "{}", s.value);
    assert!((s.a + PI).abs() < 1e-12 && (s.b - PI).abs() < 1e-12);
}
