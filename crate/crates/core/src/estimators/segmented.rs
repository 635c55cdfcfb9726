//! Continuous two-regime linear model in log-log coordinates,
//!
//! ```text
//! y = c + μ< u + (μ> − μ<) (u − b) θ(u − b),    u = log10 n,  b = log10 n*
//! ```
//!
//! estimated by the iterative linearisation of Muggeo (2003): with the break
//! held at `b`, regress `y` on `{1, u, (u − b)₊, θ(u − b)}`. The coefficient
//! `g` of the step term measures how far the break should move; since
//! `(u − b − δ)₊ ≈ (u − b)₊ − δ θ(u − b)`, the update is `b ← b − g / (μ> − μ<)`.
//! Steps are halved until the residual sum of squares does not increase.

use serde::{Deserialize, Serialize};

use super::ols;
use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 20;
const MIN_SLOPE_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentedOptions {
    /// Starting break in log10 units; the median abscissa when absent.
    pub init_break: Option<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SegmentedOptions {
    fn default() -> Self {
        Self {
            init_break: None,
            tolerance: 1e-6,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedFit {
    pub mu_below: f64,
    pub mu_above: f64,
    /// Break point in count units, `10^b`.
    pub n_star: f64,
    /// Value of the lower branch at `u = 0`, i.e. `log10 W` at `n = 1`.
    pub intercept: f64,
    /// Gaussian log-likelihood of the residuals (variance at its MLE).
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SegmentedFit {
    pub fn break_log10(&self) -> f64 {
        self.n_star.log10()
    }

    /// Model value at `u` (log10 units).
    pub fn predict(&self, u: f64) -> f64 {
        self.intercept + self.mu_below * u + (self.mu_above - self.mu_below) * (u - self.break_log10()).max(0.0)
    }

    /// Left and right limits of the model at the break.
    pub fn limits_at_break(&self) -> (f64, f64) {
        let b = self.break_log10();
        let left = self.intercept + self.mu_below * b;
        // upper branch written as its own line through the break
        let right = (self.intercept - (self.mu_above - self.mu_below) * b) + self.mu_above * b;
        (left, right)
    }
}

fn step(u: f64, b: f64) -> f64 {
    if u > b {
        1.0
    } else {
        0.0
    }
}

/// Fits the broken-line model to `(log10 n, log10 W)` points.
pub fn fit_segmented(points: &[(f64, f64)], options: &SegmentedOptions) -> Result<SegmentedFit> {
    if points.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            fit: "segmented",
            found: points.len(),
            needed: MIN_POINTS,
        });
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::InvalidParameter("segmented points must be finite".into()));
    }
    let mut us: Vec<f64> = points.iter().map(|p| p.0).collect();
    us.sort_by(f64::total_cmp);
    let n = us.len();
    // keep at least two points on each side of the break
    let (lo, hi) = (us[1], us[n - 3]);
    if !(lo < hi) {
        return Err(Error::Singular("segmented"));
    }
    let median = if n % 2 == 1 {
        us[n / 2]
    } else {
        0.5 * (us[n / 2 - 1] + us[n / 2])
    };
    let mut b = options.init_break.unwrap_or(median).clamp(lo, hi);

    let rss_at = |b: f64| -> Result<f64> {
        let rows = points.iter().map(|&(u, y)| (vec![1.0, u, (u - b).max(0.0)], y));
        ols(rows, 3).map(|(_, rss, _)| rss).ok_or(Error::Singular("segmented"))
    };

    let mut converged = false;
    let mut iterations = 0;
    let mut rss = rss_at(b)?;
    while iterations < options.max_iterations {
        iterations += 1;
        let rows = points
            .iter()
            .map(|&(u, y)| (vec![1.0, u, (u - b).max(0.0), step(u, b)], y));
        let (beta, _, _) = ols(rows, 4).ok_or(Error::Singular("segmented"))?;
        let gap = beta[2];
        if !gap.is_finite() || gap.abs() < MIN_SLOPE_GAP {
            return Err(Error::NoBreak(gap));
        }
        // halve the step until it stays in range and does not increase the
        // residual sum of squares; with noisy data the raw step can bounce
        // between neighbouring abscissae forever
        let mut delta = -beta[3] / gap;
        let mut accepted = None;
        for _ in 0..60 {
            let next = b + delta;
            if (lo..=hi).contains(&next) {
                let next_rss = rss_at(next)?;
                if next_rss <= rss {
                    accepted = Some((next, next_rss));
                    break;
                }
            }
            delta *= 0.5;
            if delta.abs() < options.tolerance {
                break;
            }
        }
        let Some((next, next_rss)) = accepted else {
            converged = true;
            break;
        };
        let moved = (next - b).abs();
        let improvement = if rss > 0.0 { (rss - next_rss) / rss } else { 0.0 };
        b = next;
        rss = next_rss;
        if moved < options.tolerance || improvement < options.tolerance {
            converged = true;
            break;
        }
    }

    let rows = points.iter().map(|&(u, y)| (vec![1.0, u, (u - b).max(0.0)], y));
    let (beta, rss, _) = ols(rows, 3).ok_or(Error::Singular("segmented"))?;
    if !beta[2].is_finite() || beta[2].abs() < MIN_SLOPE_GAP {
        return Err(Error::NoBreak(beta[2]));
    }
    let nf = n as f64;
    let sigma2 = (rss / nf).max(1e-300);
    let log_likelihood = -0.5 * nf * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);

    Ok(SegmentedFit {
        mu_below: beta[1],
        mu_above: beta[1] + beta[2],
        n_star: 10f64.powf(b),
        intercept: beta[0],
        log_likelihood,
        converged,
        iterations,
    })
}

/// Runs [`fit_segmented`] from `starts` initial breaks placed at interior
/// quantiles of the abscissae and keeps the best likelihood, preferring
/// converged fits.
pub fn fit_segmented_multistart(points: &[(f64, f64)], starts: usize) -> Result<SegmentedFit> {
    let mut us: Vec<f64> = points.iter().map(|p| p.0).collect();
    us.sort_by(f64::total_cmp);
    if us.is_empty() {
        return fit_segmented(points, &SegmentedOptions::default());
    }
    let mut best: Option<SegmentedFit> = None;
    let mut first_err = None;
    for k in 1..=starts.max(1) {
        let q = k as f64 / (starts.max(1) + 1) as f64;
        let idx = ((us.len() - 1) as f64 * q).round() as usize;
        let options = SegmentedOptions {
            init_break: Some(us[idx]),
            ..SegmentedOptions::default()
        };
        match fit_segmented(points, &options) {
            Ok(fit) => {
                let better = match &best {
                    None => true,
                    Some(b) => (fit.converged, fit.log_likelihood) > (b.converged, b.log_likelihood),
                };
                if better {
                    best = Some(fit);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}
