//! Normalized forward/inverse transforms on the periodic grid.
//!
//! Forward coefficients are `(1/n^d) * sum f(x) e^{-i k x}`, so the zero mode
//! is the mean. Plans are cached process-wide; rustfft plans are deterministic.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::grid::Grid;

type Plan = Arc<dyn Fft<f64>>;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Plan>>> = Lazy::new(|| Mutex::new(HashMap::new()));
static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(n: usize, forward: bool) -> Plan {
    let mut plans = PLANS.lock().expect("fft plan cache poisoned");
    plans
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = PLANNER.lock().expect("fft planner poisoned");
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for ib in (0..n).step_by(B) {
        for jb in (ib..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                let start = if ib == jb { i + 1 } else { jb };
                for j in start..(jb + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

fn transform(grid: &Grid, data: &mut [Complex64], forward: bool) {
    let n = grid.n();
    let p = plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];
    p.process_with_scratch(data, &mut scratch);
    if grid.dim() == 2 {
        transpose(data, n);
        p.process_with_scratch(data, &mut scratch);
        transpose(data, n);
    }
    if forward {
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }
}

pub(crate) fn forward(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, true);
    data
}

pub(crate) fn inverse(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    transform(grid, &mut data, false);
    data.iter().map(|c| c.re).collect()
}

pub(crate) fn inverse_complex(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, false);
}
