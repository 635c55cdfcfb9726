//! Calibration of the asset-selection model from an observed snapshot.

use serde::{Deserialize, Serialize};

use super::beta::{fit_beta, MIN_SAMPLES};
use super::fraction::fmax;
use super::selection::{bin_rank_samples, log2_bins, DiversificationBin};
use crate::error::{Error, Result};
use crate::estimators::SegmentedFit;
use crate::universe::UniverseSnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBin {
    pub lo: usize,
    pub hi: usize,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub median_fmax: Option<f64>,
    /// Funds of the snapshot falling in this bin.
    pub count: usize,
    /// True when the bin carries a usable Beta kernel and `f_max`.
    pub calibrated: bool,
}

impl ModelBin {
    pub fn range(&self) -> DiversificationBin {
        DiversificationBin {
            lo: self.lo,
            hi: self.hi,
        }
    }

    /// A calibrated bin with the given kernel and investment ratio.
    pub fn calibrated(lo: usize, hi: usize, a: f64, b: f64, median_fmax: f64) -> Self {
        Self {
            lo,
            hi,
            a: Some(a),
            b: Some(b),
            median_fmax: Some(median_fmax),
            count: 0,
            calibrated: true,
        }
    }

    /// `(a, b, f_max)` when the bin is usable.
    pub fn kernel(&self) -> Option<(f64, f64, f64)> {
        match (self.calibrated, self.a, self.b, self.median_fmax) {
            (true, Some(a), Some(b), Some(f)) => Some((a, b, f)),
            _ => None,
        }
    }
}

/// Everything the simulator needs: the break point and lower-branch law of
/// the segmented fit, and one Beta kernel plus median `f_max` per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionModel {
    pub n_star: f64,
    pub mu_below: f64,
    pub intercept: f64,
    pub bins: Vec<ModelBin>,
}

impl SelectionModel {
    pub fn bin_for(&self, n: usize) -> Option<&ModelBin> {
        self.bins.iter().find(|b| b.range().contains(n))
    }

    /// Whether a fund with `n` positions belongs to the equal-weight regime.
    pub fn is_small(&self, n: usize) -> bool {
        (n as f64) < self.n_star
    }

    /// Portfolio value on the lower branch, `10^c · n^μ<`.
    pub fn optimal_value(&self, n: usize) -> f64 {
        10f64.powf(self.intercept) * (n as f64).powf(self.mu_below)
    }

    pub fn calibrated_bins(&self) -> impl Iterator<Item = &ModelBin> {
        self.bins.iter().filter(|b| b.calibrated)
    }

    /// Bins a large-region fund could fall in that carry no kernel.
    pub fn uncalibrated_large_bins(&self) -> impl Iterator<Item = &ModelBin> {
        self.bins
            .iter()
            .filter(|b| !b.calibrated && (b.hi as f64) > self.n_star)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    /// First bin edge; lowered to the smallest observed `n_i` if needed.
    pub min_positions: usize,
    /// Minimum number of edges for a bin's Beta fit.
    pub min_edges: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            min_positions: 5,
            min_edges: MIN_SAMPLES,
        }
    }
}

/// Builds the selection model. Only funds at or above `n*` inform the
/// per-bin kernels and `f_max` medians; bins entirely below `n*` keep just
/// their fund count.
pub fn calibrate(
    snapshot: &UniverseSnapshot,
    segmented: &SegmentedFit,
    config: &CalibrationConfig,
) -> Result<SelectionModel> {
    if !segmented.converged {
        return Err(Error::NotConverged);
    }
    let sizes: Vec<usize> = snapshot.funds().iter().map(|f| f.n_positions()).collect();
    let (Some(&min_n), Some(&max_n)) = (sizes.iter().min(), sizes.iter().max()) else {
        return Err(Error::EmptyInput("funds"));
    };
    let n_star = segmented.n_star;
    let is_large = |n: usize| n as f64 >= n_star;
    let ranks = snapshot.scaled_ranks();
    let fmax_by_fund: Vec<(usize, f64)> = snapshot
        .funds()
        .iter()
        .map(|f| (f.n_positions(), fmax(f, snapshot).f_max))
        .collect();

    let bins = log2_bins(config.min_positions.min(min_n), max_n)
        .into_iter()
        .map(|range| {
            let count = sizes.iter().filter(|&&n| range.contains(n)).count();
            let mut bin = ModelBin {
                lo: range.lo,
                hi: range.hi,
                a: None,
                b: None,
                median_fmax: None,
                count,
                calibrated: false,
            };
            if (range.hi as f64) <= n_star {
                return bin;
            }
            let (large_funds, samples) = bin_rank_samples(snapshot, &ranks, range, is_large);
            if large_funds == 0 || samples.len() < config.min_edges.max(MIN_SAMPLES) {
                return bin;
            }
            let mut fractions: Vec<f64> = fmax_by_fund
                .iter()
                .filter(|(n, _)| range.contains(*n) && is_large(*n))
                .map(|&(_, f)| f)
                .collect();
            bin.median_fmax = Some(median(&mut fractions));
            match fit_beta(&samples, snapshot.n_securities()) {
                Ok(fit) => {
                    bin.a = Some(fit.a);
                    bin.b = Some(fit.b);
                    bin.calibrated = true;
                }
                Err(e) => log::warn!("bin [{}, {}) left uncalibrated: {e}", range.lo, range.hi),
            }
            bin
        })
        .collect();

    Ok(SelectionModel {
        n_star,
        mu_below: segmented.mu_below,
        intercept: segmented.intercept,
        bins,
    })
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
