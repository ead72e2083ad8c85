use std::f64::consts::TAU;

use inflation_core::calculus::{divergence, perp_grad_inv_laplacian, vorticity};
use inflation_core::flow::{cellular_velocity, integrate_flow, GriddedVelocity, Velocity};
use inflation_core::littlewood_paley::FilterBank;
use inflation_core::transport::commutator_apply;
use inflation_core::{Field, Grid, Multiplier};
use proptest::prelude::*;

fn square(n: usize) -> Grid {
    Grid::square(n, TAU).unwrap()
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn parseval(seed in any::<u64>(), cutoff in 1.0f64..20.0) {
        let g = square(64);
        let f = Field::random_smooth(g, cutoff, false, seed);
        let physical: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.cell_measure();
        let spectral: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.domain_measure();
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1e-300));
    }

    #[test]
    fn hilbert_squares_to_minus_identity(seed in any::<u64>(), cutoff in 1.0f64..500.0) {
        let g = Grid::line(2048, TAU).unwrap();
        let f = Field::random_smooth(g, cutoff, true, seed);
        let h = Multiplier::hilbert();
        let hh = h.apply(&h.apply(&f).unwrap()).unwrap();
        prop_assert!(hh.add(&f).unwrap().sup_norm() <= 1e-12);
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity(seed in any::<u64>(), cutoff in 1.0f64..20.0) {
        let g = square(64);
        let f = Field::random_smooth(g, cutoff, true, seed);
        let sum = Multiplier::riesz_pair(1, 1).unwrap().sum(&Multiplier::riesz_pair(2, 2).unwrap());
        let r1 = Multiplier::riesz(1).unwrap();
        let twice = r1.apply(&r1.apply(&f).unwrap()).unwrap();
        prop_assert!(sum.apply(&f).unwrap().add(&f).unwrap().sup_norm() <= 1e-12);
        prop_assert!(twice.distance(&Multiplier::riesz_pair(1, 1).unwrap().apply(&f).unwrap()) <= 1e-12);
    }

    #[test]
    fn biot_savart_inverts_the_curl(seed in any::<u64>(), cutoff in 1.0f64..20.0) {
        let g = square(64);
        let w = Field::random_smooth(g, cutoff, true, seed);
        let u = perp_grad_inv_laplacian(&w).unwrap();
        prop_assert!(divergence(&u).sup_norm() <= 1e-12);
        prop_assert!(vorticity(&u).distance(&w) <= 1e-11);
    }

    #[test]
    fn exponential_is_a_semigroup(seed in any::<u64>(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let g = square(64);
        let f = Field::random_smooth(g, 12.0, false, seed);
        let r = Multiplier::riesz_pair(1, 2).unwrap();
        let two = r.exp(s).unwrap().apply(&r.exp(t).unwrap().apply(&f).unwrap()).unwrap();
        let one = r.exp(s + t).unwrap().apply(&f).unwrap();
        prop_assert!(one.distance(&two) <= 1e-12);
        let back = r.exp(-t).unwrap().apply(&r.exp(t).unwrap().apply(&f).unwrap()).unwrap();
        prop_assert!(back.distance(&f) <= 1e-12);
    }

    #[test]
    fn littlewood_paley_reconstructs_band_limited_fields(seed in any::<u64>(), frac in 0.05f64..1.0) {
        let g = square(128);
        let bank = FilterBank::new(g).unwrap();
        let f = Field::random_smooth(g, frac * bank.resolved_radius(), false, seed);
        let mut sum = bank.low_pass(&f, 0).unwrap();
        for q in 0..=bank.q_max() {
            sum = sum.add(&bank.dyadic_block(&f, q).unwrap()).unwrap();
        }
        prop_assert!(sum.distance(&f) <= 1e-12);
    }

    #[test]
    fn bernstein_ratio_is_scale_covariant(seed in any::<u64>(), q in 0i32..5) {
        let g = square(128);
        let bank = FilterBank::new(g).unwrap();
        let f = Field::random_smooth(g, bank.resolved_radius(), true, seed);
        let a = bank.bernstein_check(&f, q, 2.0, 4.0).unwrap();
        let b = bank.bernstein_check(&f.scaled(-3.5), q, 2.0, 4.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(bank.bernstein_check(&f, q, 4.0, 2.0).is_err());
    }
}

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn commutator_is_linear(seed in 0u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = square(64);
        let phi = integrate_flow(&cellular_velocity(1.0), g, 0.05, 0.01).unwrap();
        let r = Multiplier::riesz_pair(2, 2).unwrap();
        let v = Field::random_smooth(g, 6.0, true, seed);
        let w = Field::random_smooth(g, 6.0, true, seed + 1);
        let lhs = commutator_apply(&r, &phi, &v.combine(a, &w, b).unwrap()).unwrap();
        let rhs = commutator_apply(&r, &phi, &v).unwrap().combine(a, &commutator_apply(&r, &phi, &w).unwrap(), b).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-11);
    }

    #[test]
    fn flow_maps_satisfy_the_gronwall_bound(seed in 0u64..1000, t in 0.05f64..1.0) {
        let g = square(64);
        let w = Field::random_smooth(g, 3.0, true, seed);
        let u = GriddedVelocity::new(&perp_grad_inv_laplacian(&w).unwrap());
        let lip = u.lipschitz();
        let phi = integrate_flow(&u, g, t, 0.01).unwrap();
        prop_assert!(phi.lip_forward <= t * lip * (t * lip).exp());
        prop_assert!(phi.lip_backward <= t * lip * (t * lip).exp());
    }
}

#[test]
fn cellular_flow_map_preserves_area_and_inverts() {
    let g = square(128);
    let phi = integrate_flow(&cellular_velocity(1.0), g, 0.5, 0.01).unwrap();
    let det = phi.jacobian_determinant();
    assert!(det.map(|d| d - 1.0).sup_norm() < 1e-6);
    assert!(phi.composition_residual() < 1e-8);
    let lip = cellular_velocity(1.0).lipschitz();
    assert!(phi.m() <= 0.5 * lip * (0.5 * lip).exp());
}

#[test]
fn commutator_vanishes_for_the_identity_map() {
    let g = square(64);
    let phi = inflation_core::flow::FlowMap::identity(g);
    let w = Field::random_smooth(g, 6.0, true, 3);
    let c = commutator_apply(&Multiplier::riesz_pair(2, 2).unwrap(), &phi, &w).unwrap();
    assert!(c.sup_norm() <= 1e-14);
}
