use serde::{Deserialize, Serialize};

use super::ols;
use crate::error::{Error, Result};

/// `log10 y = exponent · log10 x + intercept`, fitted by least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub residual_variance: f64,
    pub n_points: usize,
    pub x_min: f64,
}

impl PowerLawFit {
    pub fn predict_log10(&self, x: f64) -> f64 {
        self.intercept + self.exponent * x.log10()
    }
}

/// Fits `y ∝ x^exponent` on the raw points with `x >= x_min`.
/// Non-positive coordinates are ignored.
pub fn fit_power_law(points: &[(f64, f64)], x_min: f64) -> Result<PowerLawFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x >= x_min && *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let n = logs.len();
    if n < 3 {
        return Err(Error::TooFewPoints {
            fit: "power law",
            found: n,
            needed: 3,
        });
    }
    // centring keeps the normal equations well conditioned
    let x_bar = logs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let (beta, rss, cov) = ols(logs.iter().map(|&(x, y)| (vec![1.0, x - x_bar], y)), 2)
        .filter(|(b, _, _)| b.iter().all(|v| v.is_finite()))
        .ok_or(Error::Singular("power law"))?;
    let sxx: f64 = logs.iter().map(|p| (p.0 - x_bar).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Singular("power law"));
    }
    let residual_variance = rss / (n - 2) as f64;
    Ok(PowerLawFit {
        exponent: beta[1],
        intercept: beta[0] - beta[1] * x_bar,
        stderr: (residual_variance * cov[(1, 1)]).sqrt(),
        residual_variance,
        n_points: n,
        x_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..50).map(|i| (i as f64, 7.0 * (i as f64).powi(2))).collect();
        let fit = fit_power_law(&pts, 0.0).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-9);
        assert!((fit.intercept - 7f64.log10()).abs() < 1e-9);
        assert!(fit.residual_variance < 1e-20);
        assert_eq!(fit.n_points, 49);
    }

    #[test]
    fn threshold_restricts_points() {
        let mut pts: Vec<(f64, f64)> = (1..100).map(|i| (i as f64, i as f64)).collect();
        pts.extend((100..200).map(|i| (i as f64, (i as f64).powi(3))));
        let fit = fit_power_law(&pts, 100.0).unwrap();
        assert_eq!(fit.n_points, 100);
        assert!((fit.exponent - 3.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points_after_threshold() {
        let pts = [(1.0, 1.0), (2.0, 4.0), (300.0, 9.0)];
        assert!(matches!(
            fit_power_law(&pts, 2.0),
            Err(Error::TooFewPoints { found: 2, .. })
        ));
    }

    #[test]
    fn constant_x_is_singular() {
        let pts = [(3.0, 1.0), (3.0, 4.0), (3.0, 9.0)];
        assert!(fit_power_law(&pts, 0.0).is_err());
    }
}
