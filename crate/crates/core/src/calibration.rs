//! Constants frozen by the calibration sweep and the pilot-run parameters.
//!
//! The values live in `data/calibration.toml` and are compiled in. Checks
//! compare measurements against a constant times [`SLACK`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplicative slack applied to every calibrated constant.
pub const SLACK: f64 = 1.1;

const FROZEN: &str = include_str!("../data/calibration.toml");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Largest Bernstein ratio over the random suite.
    pub bernstein: f64,
    /// `|f|_inf <= C |f|_{B^{1/2}_{4,1}}`.
    pub embedding: f64,
    /// `|[R,Phi] w|_B <= C M |w|_B`.
    pub commutator: f64,
    /// `|f(t)|_B <= |f0|_B exp(C t |u|_Lip)`.
    pub besov_growth: f64,
    pub lower_bound: f64,
    /// Duhamel residual on the cellular benchmark.
    pub duhamel_tolerance: f64,
    /// `c` in `|grad u(t)|_p >= |grad u0|_p + c p t - C p t^2`.
    pub lp_growth_rate: f64,
    /// `C` in the same bound.
    pub lp_growth_curvature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerPilot {
    pub n: u32,
    pub eps: f64,
    pub t_star: f64,
    pub points: usize,
    pub period: f64,
    pub dt: f64,
    pub besov_budget: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C1Pilot {
    pub delta: f64,
    pub eta: f64,
    pub reg: u32,
    pub points: usize,
    pub period: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub constants: Constants,
    pub euler_pilot: EulerPilot,
    pub c1_pilot: C1Pilot,
}

impl Calibration {
    /// The compiled-in values.
    pub fn frozen() -> Self {
        Self::parse(FROZEN).expect("bundled calibration file is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_round_trips() {
        let c = Calibration::frozen();
        assert_eq!(Calibration::parse(&c.to_toml().unwrap()).unwrap(), c);
    }
}
