//! Experiment configuration: one TOML table per experiment.
//!
//! Every key has a default, so an empty file is a valid configuration. The
//! hash of a configuration is the SHA-256 of its canonical re-emission, which
//! makes it insensitive to formatting, comments and key order.
//!
//! ```toml
//! seed = 7
//!
//! [assumption1]
//! points = 2048        # grid points per side
//! period = 12.566      # side length
//! n_min = 2
//! n_max = 8
//!
//! [linear_inflation]
//! points = 512
//! period = 6.283
//! eps = [0.1, 0.05, 0.025]
//! time_constant = 0.5  # t = time_constant / (1 + |u|_Lip)
//! amplitude = 1.0      # cellular-flow amplitude; 0 switches the flow off
//! dt = 0.005
//!
//! [euler_inflation]    # defaults come from the frozen pilot manifest
//! points = 1024
//! period = 6.283
//! n = 8
//! eps = 0.01
//! t_star = 3.0
//! dt = 0.05
//! besov_budget = 1.0
//!
//! [exp_growth]
//! points = [256, 512]
//! t_end = 2.0
//! dt = 0.04
//! constant_datum = false
//!
//! [c1_inflation]
//! points = 1024
//! period = 6.283
//! delta = 3.0517578125e-5
//! eta = 4.8828125e-4
//! reg = 24
//! ps = [2, 4, 8, 16, 32, 64]
//! times = [0.0, 0.5, 1.0, 2.0]
//! dt = 0.05
//! radial_scales = [3, 4, 5, 6, 7, 8]
//!
//! [commutator_scan]
//! points = 512
//! period = 6.283
//! m = [0.0, 0.0125, 0.025, 0.05, 0.1]
//! suite = 3
//! cutoff = 8.0
//! ps = [2, 8, 32]
//! dt = 0.01
//!
//! [calibrate]
//! points = 512
//! suite = 100
//! ```

use std::path::Path;

use inflation_core::calibration::Calibration;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub assumption1: Assumption1,
    pub linear_inflation: LinearInflation,
    pub euler_inflation: EulerInflation,
    pub exp_growth: ExpGrowth,
    pub c1_inflation: C1Inflation,
    pub commutator_scan: CommutatorScan,
    pub calibrate: Calibrate,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            assumption1: Assumption1::default(),
            linear_inflation: LinearInflation::default(),
            euler_inflation: EulerInflation::default(),
            exp_growth: ExpGrowth::default(),
            c1_inflation: C1Inflation::default(),
            commutator_scan: CommutatorScan::default(),
            calibrate: Calibrate::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Assumption1 {
    pub points: usize,
    pub period: f64,
    pub n_min: u32,
    pub n_max: u32,
}

impl Default for Assumption1 {
    fn default() -> Self {
        Self { points: 2048, period: 2.0 * TWO_PI, n_min: 2, n_max: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearInflation {
    pub points: usize,
    pub period: f64,
    pub eps: Vec<f64>,
    pub time_constant: f64,
    pub amplitude: f64,
    pub dt: f64,
}

impl Default for LinearInflation {
    fn default() -> Self {
        Self { points: 512, period: TWO_PI, eps: vec![0.1, 0.05, 0.025], time_constant: 0.5, amplitude: 1.0, dt: 0.005 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EulerInflation {
    pub points: usize,
    pub period: f64,
    pub n: u32,
    pub eps: f64,
    pub t_star: f64,
    pub dt: f64,
    pub besov_budget: f64,
}

impl Default for EulerInflation {
    fn default() -> Self {
        let p = Calibration::frozen().euler_pilot;
        Self {
            points: p.points,
            period: p.period,
            n: p.n,
            eps: p.eps,
            t_star: p.t_star,
            dt: p.dt,
            besov_budget: p.besov_budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpGrowth {
    pub points: Vec<usize>,
    pub t_end: f64,
    pub dt: f64,
    pub constant_datum: bool,
}

impl Default for ExpGrowth {
    fn default() -> Self {
        Self { points: vec![256, 512], t_end: 2.0, dt: 0.04, constant_datum: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct C1Inflation {
    pub points: usize,
    pub period: f64,
    pub delta: f64,
    pub eta: f64,
    pub reg: u32,
    pub ps: Vec<f64>,
    pub times: Vec<f64>,
    pub dt: f64,
    pub radial_scales: Vec<u32>,
}

impl Default for C1Inflation {
    fn default() -> Self {
        let p = Calibration::frozen().c1_pilot;
        Self {
            points: p.points,
            period: p.period,
            delta: p.delta,
            eta: p.eta,
            reg: p.reg,
            ps: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            times: vec![0.0, 0.5, 1.0, 2.0],
            dt: 0.05,
            radial_scales: vec![3, 4, 5, 6, 7, 8],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommutatorScan {
    pub points: usize,
    pub period: f64,
    pub m: Vec<f64>,
    pub suite: usize,
    pub cutoff: f64,
    pub ps: Vec<f64>,
    pub dt: f64,
}

impl Default for CommutatorScan {
    fn default() -> Self {
        Self {
            points: 512,
            period: TWO_PI,
            m: vec![0.0, 0.0125, 0.025, 0.05, 0.1],
            suite: 3,
            cutoff: 8.0,
            ps: vec![2.0, 8.0, 32.0],
            dt: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Calibrate {
    pub points: usize,
    pub suite: usize,
}

impl Default for Calibrate {
    fn default() -> Self {
        Self { points: 512, suite: 100 }
    }
}

/// Overrides given on the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub resolution: Option<usize>,
    pub period: Option<f64>,
    pub dt: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    /// Canonical text form.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Hex SHA-256 of [`emit`](Self::emit).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.emit().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |what: &str| Err(CliError::Config(what.to_string()));
        let grids = [
            (self.assumption1.points, self.assumption1.period),
            (self.linear_inflation.points, self.linear_inflation.period),
            (self.euler_inflation.points, self.euler_inflation.period),
            (self.c1_inflation.points, self.c1_inflation.period),
            (self.commutator_scan.points, self.commutator_scan.period),
        ];
        if grids.iter().any(|&(n, l)| n < 8 || !(l > 0.0)) || self.exp_growth.points.iter().any(|&n| n < 8) {
            return bad("grids need at least 8 points per side and a positive period");
        }
        if self.assumption1.n_min > self.assumption1.n_max + 1 {
            return bad("assumption1.n_min exceeds n_max");
        }
        if self.linear_inflation.eps.iter().any(|e| !(*e > 0.0)) || !(self.euler_inflation.eps > 0.0) {
            return bad("eps values must be positive");
        }
        let steps = [
            self.linear_inflation.dt,
            self.euler_inflation.dt,
            self.exp_growth.dt,
            self.c1_inflation.dt,
            self.commutator_scan.dt,
        ];
        if steps.iter().any(|dt| !(*dt > 0.0)) {
            return bad("time steps must be positive");
        }
        if self.c1_inflation.ps.iter().chain(&self.commutator_scan.ps).any(|p| !(*p >= 1.0)) {
            return bad("L^p exponents must be at least 1");
        }
        if self.commutator_scan.m.iter().any(|m| !(*m >= 0.0)) {
            return bad("commutator_scan.m must be nonnegative");
        }
        Ok(())
    }

    /// Applies command-line overrides to the section of `experiment`.
    pub fn apply(&mut self, experiment: &str, o: Overrides) {
        macro_rules! grid {
            ($s:expr) => {{
                if let Some(n) = o.resolution {
                    $s.points = n;
                }
                if let Some(l) = o.period {
                    $s.period = l;
                }
            }};
        }
        match experiment {
            "assumption1-scan" => grid!(self.assumption1),
            "linear-inflation" => grid!(self.linear_inflation),
            "euler-inflation" => grid!(self.euler_inflation),
            "c1-inflation" => grid!(self.c1_inflation),
            "commutator-scan" => grid!(self.commutator_scan),
            "exp-growth" => {
                if let Some(n) = o.resolution {
                    self.exp_growth.points = vec![n, 2 * n];
                }
            }
            "calibrate" => {
                if let Some(n) = o.resolution {
                    self.calibrate.points = n;
                }
            }
            _ => {}
        }
        if let Some(dt) = o.dt {
            match experiment {
                "linear-inflation" => self.linear_inflation.dt = dt,
                "euler-inflation" => self.euler_inflation.dt = dt,
                "exp-growth" => self.exp_growth.dt = dt,
                "c1-inflation" => self.c1_inflation.dt = dt,
                "commutator-scan" => self.commutator_scan.dt = dt,
                _ => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = ExperimentConfig::parse("seed = 3\n[assumption1]\nn_max = 5\n").unwrap();
        let b = ExperimentConfig::parse("# note\n[assumption1]\nn_max    = 5\n\n[linear_inflation]\n").unwrap();
        assert_ne!(a.hash(), b.hash());
        let c = ExperimentConfig::parse("[assumption1]\nn_max = 5\n# trailing\n").unwrap();
        assert_eq!(b.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("[assumption1]\nnmax = 5\n").is_err());
    }
}
