//! Diversification bins and the empirical distribution of held scaled ranks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::universe::UniverseSnapshot;

/// Half-open range `[lo, hi)` of diversification `n_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiversificationBin {
    pub lo: usize,
    pub hi: usize,
}

impl DiversificationBin {
    pub fn contains(&self, n: usize) -> bool {
        self.lo <= n && n < self.hi
    }
}

/// Base-2 logarithmic bins starting at `first_edge`: `[5, 8), [8, 16), …`,
/// extended until `max_n` is covered.
pub fn log2_bins(first_edge: usize, max_n: usize) -> Vec<DiversificationBin> {
    let mut lo = first_edge.max(1);
    let last = max_n.max(lo);
    let mut bins = Vec::new();
    while lo <= last {
        let hi = if lo.is_power_of_two() {
            lo * 2
        } else {
            lo.next_power_of_two()
        };
        bins.push(DiversificationBin { lo, hi });
        lo = hi;
    }
    bins
}

/// Scaled ranks of every (fund, security) edge whose fund passes `keep_fund`
/// and falls in `bin`.
pub fn bin_rank_samples(
    snapshot: &UniverseSnapshot,
    scaled_ranks: &[f64],
    bin: DiversificationBin,
    keep_fund: impl Fn(usize) -> bool,
) -> (usize, Vec<f64>) {
    let mut funds = 0;
    let mut samples = Vec::new();
    for fund in snapshot.funds() {
        let n = fund.n_positions();
        if !bin.contains(n) || !keep_fund(n) {
            continue;
        }
        funds += 1;
        samples.extend(fund.positions().iter().map(|p| scaled_ranks[p.security]));
    }
    (funds, samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDensity {
    pub bin: DiversificationBin,
    pub funds: usize,
    /// Raw scaled ranks, one per edge.
    pub samples: Vec<f64>,
    /// Histogram edges over `[0, 1]`; cell `k` is `(edges[k], edges[k+1]]`.
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

/// Histogram of held scaled ranks for the funds of one bin, normalised to
/// integrate to one over `(0, 1]`.
pub fn selection_density(
    snapshot: &UniverseSnapshot,
    bin: DiversificationBin,
    cells: usize,
) -> Result<SelectionDensity> {
    let ranks = snapshot.scaled_ranks();
    let (funds, samples) = bin_rank_samples(snapshot, &ranks, bin, |_| true);
    if funds == 0 {
        return Err(Error::EmptyBin { lo: bin.lo, hi: bin.hi });
    }
    let cells = cells.max(1);
    let mut counts = vec![0usize; cells];
    for &rho in &samples {
        let k = ((rho * cells as f64).ceil() as usize).clamp(1, cells) - 1;
        counts[k] += 1;
    }
    let width = 1.0 / cells as f64;
    let total = samples.len().max(1) as f64;
    Ok(SelectionDensity {
        bin,
        funds,
        samples,
        edges: (0..=cells).map(|k| k as f64 * width).collect(),
        density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
    })
}
