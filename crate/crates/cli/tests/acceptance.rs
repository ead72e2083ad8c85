//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use inflation_cli::experiments::{self, CALIBRATION_SEED};
use inflation_cli::{ExperimentConfig, ExperimentRecord};
use inflation_core::calculus::perp_grad_inv_laplacian;
use inflation_core::calibration::{Calibration, SLACK};
use inflation_core::counterexamples::{cellular_vorticity, make_c1_datum};
use inflation_core::euler::{pressure_hessian_profile, run, EulerState, EulerStepper};
use inflation_core::fit::linear_fit;
use inflation_core::flow::{cellular_velocity, integrate_flow, zero_velocity, GriddedVelocity, Velocity};
use inflation_core::littlewood_paley::FilterBank;
use inflation_core::transport::solve_forced_transport;
use inflation_core::{Field, Grid, Multiplier};

type Outcome = Result<(bool, String), String>;

const HILBERT_TOL: f64 = 1e-8;
const LP_TOL: f64 = 1e-10;
const DUHAMEL_REFINEMENT: f64 = 8.0;
const CONSERVATION_TOL: f64 = 1e-6;
const STATIONARY_TOL: f64 = 1e-8;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn within(limit: f64, start: Instant) -> (bool, f64) {
    let s = start.elapsed().as_secs_f64();
    (s < limit, s)
}

fn named(rec: &ExperimentRecord, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in names {
        match rec.checks.iter().find(|c| c.name == *n) {
            Some(c) => {
                ok &= c.passed;
                detail.push(format!("{}: {}", n, c.detail));
            }
            None => {
                ok = false;
                detail.push(format!("{n}: missing"));
            }
        }
    }
    (ok, detail.join("; "))
}

fn hilbert_toy_model() -> Outcome {
    let start = Instant::now();
    let g = Grid::line(4096, TAU).map_err(err)?;
    let f0 = Field::random_smooth(g, 40.0, true, 0);
    let h = Multiplier::hilbert();
    let hf = h.apply(&f0).map_err(err)?;
    let tr = solve_forced_transport(&f0, &zero_velocity(), &h, 1.0, 0.01, 10).map_err(err)?;
    let mut worst = 0.0_f64;
    for t in [0.1_f64, 0.5, 1.0] {
        let exact = f0.combine(t.cos(), &hf, t.sin()).map_err(err)?;
        let got = tr.checkpoint(t).ok_or(format!("no checkpoint at {t}"))?;
        worst = worst.max(got.distance(&exact));
    }
    let (fast, secs) = within(5.0, start);
    Ok((worst <= HILBERT_TOL && fast, format!("max error {worst:.2e} (<= {HILBERT_TOL:e}), {secs:.2} s (< 5)")))
}

fn littlewood_paley(cal: &Calibration) -> Outcome {
    let start = Instant::now();
    let g = Grid::square(512, TAU).map_err(err)?;
    let bank = FilterBank::new(g).map_err(err)?;
    let partition = bank.partition_residual();
    let suite = experiments::band_limited_suite(&bank, 0..100);
    let mut recon = 0.0_f64;
    for f in &suite {
        let mut sum = bank.low_pass(f, 0).map_err(err)?;
        for q in 0..=bank.q_max() {
            sum = sum.add(&bank.dyadic_block(f, q).map_err(err)?).map_err(err)?;
        }
        recon = recon.max(sum.distance(f));
    }
    let (bern, emb) = experiments::bernstein_and_embedding(&bank, &suite).map_err(err)?;
    let (cb, ce) = (cal.constants.bernstein * SLACK, cal.constants.embedding * SLACK);
    let (fast, secs) = within(60.0, start);
    let ok = partition <= LP_TOL && recon <= LP_TOL && bern <= cb && emb <= ce && fast;
    Ok((
        ok,
        format!(
            "partition {partition:.1e}, reconstruction {recon:.1e} (<= {LP_TOL:e}); Bernstein {bern:.4} (<= {cb:.4}); \
             |f|_inf/|f|_B {emb:.4} (<= {ce:.4}); {secs:.1} s (< 60)"
        ),
    ))
}

fn assumption1(cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let rec = experiments::assumption1_scan(&cfg.assumption1, &cfg.hash()).map_err(err)?;
    let (ok, detail) =
        named(&rec, &["sup_bounded", "response_affine", "quadrature_agreement", "besov_per_n_bounded"]);
    let (fast, secs) = within(600.0, start);
    Ok((ok && fast, format!("{detail}; {secs:.0} s (< 600)")))
}

fn gronwall() -> Outcome {
    let g = Grid::square(128, TAU).map_err(err)?;
    let mut flows: Vec<Box<dyn Velocity>> = vec![Box::new(cellular_velocity(1.0))];
    for seed in 0..3 {
        let w = Field::random_smooth(g, 4.0, true, seed);
        let u = perp_grad_inv_laplacian(&w).map_err(err)?;
        flows.push(Box::new(GriddedVelocity::new(&u.scaled(1.0 / u.lipschitz()))));
    }
    let mut worst = 0.0_f64;
    for u in &flows {
        let lip = u.lipschitz();
        for t in [0.25, 0.5, 1.0] {
            let phi = integrate_flow(u.as_ref(), g, t, 0.01).map_err(err)?;
            let bound = t * lip * (t * lip).exp();
            worst = worst.max(phi.m() / bound);
        }
    }
    Ok((worst <= 1.0, format!("largest |Phi - I|_Lip / (t L e^(t L)) = {worst:.4} over 4 flows, t in {{0.25, 0.5, 1}}")))
}

fn commutator(cfg: &ExperimentConfig, cal: &Calibration) -> Outcome {
    let start = Instant::now();
    let rec = experiments::commutator_scan(&cfg.commutator_scan, cfg.seed, &cfg.hash(), cal).map_err(err)?;
    let (ok, detail) = named(&rec, &["linear_in_m", "identity_map"]);
    let (fast, secs) = within(300.0, start);
    Ok((ok && fast, format!("{detail}; {secs:.1} s (< 300)")))
}

fn duhamel(cal: &Calibration) -> Outcome {
    let seed = 0;
    assert_ne!(seed, CALIBRATION_SEED);
    let coarse = experiments::duhamel_benchmark(512, 1e-3, seed).map_err(err)?;
    let fine = experiments::duhamel_benchmark(512, 5e-4, seed).map_err(err)?;
    let tol = cal.constants.duhamel_tolerance * SLACK;
    let reduction = coarse / fine;
    Ok((
        coarse <= tol && reduction >= DUHAMEL_REFINEMENT,
        format!("residual {coarse:.3e} (<= {tol:.3e}); halving dt gives {fine:.3e}, reduction {reduction:.2}x (>= 8x)"),
    ))
}

fn euler_conservation() -> Outcome {
    let g = Grid::square(256, TAU).map_err(err)?;
    let mut worst = 0.0_f64;
    for seed in 0..3 {
        let s0 = EulerState::new(&Field::random_smooth(g, 6.0, true, seed)).map_err(err)?;
        let dt = 1.0 / (1.0 / s0.suggested_dt()).ceil();
        let s1 = run(&EulerStepper::free(g, dt).map_err(err)?, &s0, 1.0, |_| Ok(())).map_err(err)?;
        worst = worst.max((s1.energy() / s0.energy() - 1.0).abs());
        worst = worst.max((s1.enstrophy() / s0.enstrophy() - 1.0).abs());
    }
    let c0 = EulerState::new(&cellular_vorticity(g).map_err(err)?).map_err(err)?;
    let c1 = run(&EulerStepper::free(g, 0.01).map_err(err)?, &c0, 1.0, |_| Ok(())).map_err(err)?;
    let drift = c1.omega.distance(&c0.omega);
    Ok((
        worst <= CONSERVATION_TOL && drift <= STATIONARY_TOL,
        format!("largest relative energy/enstrophy drift {worst:.2e} (<= 1e-6); cellular drift {drift:.2e} (<= 1e-8)"),
    ))
}

fn euler_inflation(cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let rec = experiments::euler_inflation(&cfg.euler_inflation, &cfg.hash()).map_err(err)?;
    let (ok, detail) = named(&rec, &["inflation", "control_flat", "enstrophy_nonincreasing"]);
    let ok = ok && !rec.checks.iter().any(|c| c.name.ends_with("_run"));
    let (fast, secs) = within(900.0, start);
    Ok((ok && fast, format!("{detail}; {secs:.0} s (< 900)")))
}

fn exp_growth(cfg: &ExperimentConfig) -> Outcome {
    let rec = experiments::exp_growth(&cfg.exp_growth, &cfg.hash()).map_err(err)?;
    Ok(named(&rec, &["exponent", "resolution_trend", "log_linear"]))
}

fn c1_mechanism(cfg: &ExperimentConfig) -> Outcome {
    let c = &cfg.c1_inflation;
    let harmonic = experiments::harmonic_residual(100);
    let radial = experiments::radial_probe(&c.radial_scales);
    let xs: Vec<f64> = radial.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = radial.iter().map(|r| r.1).collect();
    let ratio = linear_fit(&xs, &ys).map_err(err)?.slope / -24.0;
    let g = Grid::square(c.points, c.period).map_err(err)?;
    let datum = make_c1_datum(c.delta, c.eta, c.reg, g).map_err(err)?;
    let profile = pressure_hessian_profile(&datum, &c.ps).map_err(err)?;
    let ps: Vec<f64> = profile.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let fit = linear_fit(&ps, &vs).map_err(err)?;
    let ok = harmonic == 0.0 && (0.5..=2.0).contains(&ratio) && fit.slope > 0.0 && fit.r_squared >= 0.95;
    Ok((
        ok,
        format!(
            "max |Lap Q| {harmonic:e} (== 0); slope ratio {ratio:.4} (in [0.5, 2]); |D^2 p0|_p slope {:.3e} (> 0), R2 {:.4} (>= 0.95)",
            fit.slope, fit.r_squared
        ),
    ))
}

fn csv_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(err)? {
        let p = entry.map_err(err)?.path();
        if p.is_dir() {
            out.extend(csv_bytes(&p)?);
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).map_err(err)?));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism(cfg: &ExperimentConfig, cal: &Calibration) -> Outcome {
    let mut cfg = cfg.clone();
    cfg.commutator_scan.points = 128;
    let hash = cfg.hash();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(err)?;
        experiments::exp_growth(&cfg.exp_growth, &hash).map_err(err)?.write(dir.path()).map_err(err)?;
        experiments::commutator_scan(&cfg.commutator_scan, cfg.seed, &hash, cal)
            .map_err(err)?
            .write(dir.path())
            .map_err(err)?;
        runs.push(csv_bytes(dir.path())?);
    }
    let files = runs[0].len();
    Ok((files > 0 && runs[0] == runs[1], format!("{files} CSV files compared byte for byte across two runs (config {})", &hash[..12])))
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig::default();
    let cal = Calibration::frozen();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("hilbert toy model", Box::new(hilbert_toy_model)),
        ("littlewood-paley", Box::new(|| littlewood_paley(&cal))),
        ("assumption-1 scan", Box::new(|| assumption1(&cfg))),
        ("flow-map bound", Box::new(gronwall)),
        ("commutator scaling", Box::new(|| commutator(&cfg, &cal))),
        ("duhamel residual", Box::new(|| duhamel(&cal))),
        ("euler conservation", Box::new(euler_conservation)),
        ("perturbed-euler inflation", Box::new(|| euler_inflation(&cfg))),
        ("exponential growth", Box::new(|| exp_growth(&cfg))),
        ("c1 mechanism", Box::new(|| c1_mechanism(&cfg))),
        ("determinism", Box::new(|| determinism(&cfg, &cal))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1} s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
