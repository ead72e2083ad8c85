//! Least-squares line fits.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y = intercept + slope x`. A perfect fit of
/// constant data reports `r_squared = 1`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a line fit needs two or more paired samples (got {} and {})",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("a line fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LinearFit { slope, intercept, r_squared })
}

/// Fit of `ln y` against `x`; the slope is an exponential rate.
pub fn log_linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::InvalidParameter("log-linear fit needs positive data".into()));
    }
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(xs, &logs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_rate() {
        let xs = [0.0, 0.5, 1.0, 1.5];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * (0.7 * x).exp()).collect();
        assert!((log_linear_fit(&xs, &ys).unwrap().slope - 0.7).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
