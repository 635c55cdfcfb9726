//! Drawing the distinct securities of one portfolio.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DrawFailure {
    TooManyPositions { requested: usize, available: usize },
    RetriesExhausted { slot: usize, retries: usize },
}

impl std::fmt::Display for DrawFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::TooManyPositions { requested, available } => {
                write!(
                    f,
                    "requested {requested} positions but only {available} securities exist"
                )
            }
            Self::RetriesExhausted { slot, retries } => {
                write!(f, "slot {slot}: {retries} consecutive duplicate draws")
            }
        }
    }
}

/// Successive sampling without replacement with probabilities proportional
/// to capitalization: each pick is drawn from the securities not yet chosen,
/// with probability `C_α / Σ_remaining C`.
#[derive(Debug, Clone)]
pub struct ProportionalSampler {
    weights: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl ProportionalSampler {
    pub fn new(caps: &[f64]) -> Result<Self> {
        let index = WeightedIndex::new(caps.iter().copied())
            .map_err(|e| Error::InvalidParameter(format!("capitalization weights: {e}")))?;
        Ok(Self {
            weights: caps.to_vec(),
            index,
        })
    }

    /// Draws `n` distinct indices. Duplicates are redrawn from the full table,
    /// which leaves the conditional law of each pick unchanged; after
    /// `max_retries` consecutive duplicates the slot is drawn exactly from the
    /// remaining weights instead.
    pub fn sample_distinct<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
        max_retries: usize,
    ) -> Result<Vec<usize>, DrawFailure> {
        let m = self.weights.len();
        if n > m {
            return Err(DrawFailure::TooManyPositions {
                requested: n,
                available: m,
            });
        }
        let mut taken = vec![false; m];
        let mut picks = Vec::with_capacity(n);
        while picks.len() < n {
            let mut choice = None;
            for _ in 0..=max_retries {
                let i = self.index.sample(rng);
                if !taken[i] {
                    choice = Some(i);
                    break;
                }
            }
            let i = choice.unwrap_or_else(|| self.draw_remaining(rng, &taken));
            taken[i] = true;
            picks.push(i);
        }
        Ok(picks)
    }

    fn draw_remaining<R: Rng + ?Sized>(&self, rng: &mut R, taken: &[bool]) -> usize {
        let total: f64 = self
            .weights
            .iter()
            .zip(taken)
            .filter(|(_, &t)| !t)
            .map(|(w, _)| w)
            .sum();
        let mut u = rng.random::<f64>() * total;
        let mut last = 0;
        for (i, (&w, &t)) in self.weights.iter().zip(taken).enumerate() {
            if t {
                continue;
            }
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
        last
    }
}

/// Draws scaled ranks from a Beta kernel and maps each to the security of
/// rank `⌈ρ M⌉`; duplicate securities are redrawn.
#[derive(Debug, Clone)]
pub struct BetaRankSampler {
    kernel: Beta<f64>,
}

impl BetaRankSampler {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Beta::new(a, b)
            .map(|kernel| Self { kernel })
            .map_err(|e| Error::InvalidParameter(format!("beta kernel ({a}, {b}): {e}")))
    }

    /// Rank in `1..=m` for a scaled rank `rho`.
    pub fn rank_of(rho: f64, m: usize) -> usize {
        ((rho * m as f64).ceil() as usize).clamp(1, m)
    }

    /// Draws `n` distinct ranks (1-based) out of `m`.
    pub fn sample_distinct<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
        m: usize,
        max_retries: usize,
    ) -> Result<Vec<usize>, DrawFailure> {
        if n > m {
            return Err(DrawFailure::TooManyPositions {
                requested: n,
                available: m,
            });
        }
        let mut taken = vec![false; m + 1];
        let mut ranks = Vec::with_capacity(n);
        for slot in 0..n {
            let mut chosen = None;
            for _ in 0..=max_retries {
                let r = Self::rank_of(self.kernel.sample(rng), m);
                if !taken[r] {
                    chosen = Some(r);
                    break;
                }
            }
            let r = chosen.ok_or(DrawFailure::RetriesExhausted {
                slot,
                retries: max_retries,
            })?;
            taken[r] = true;
            ranks.push(r);
        }
        Ok(ranks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::substream;

    #[test]
    fn picks_are_distinct() {
        let caps: Vec<f64> = (1..=50).map(|i| 1.0 / i as f64).collect();
        let s = ProportionalSampler::new(&caps).unwrap();
        let mut rng = substream(1, 0);
        let mut picks = s.sample_distinct(&mut rng, 50, 1000).unwrap();
        picks.sort();
        assert_eq!(picks, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn exhausted_retries_fall_back_to_remaining_mass() {
        // one dominant weight: with zero retries every later slot uses the exact draw
        let mut caps = vec![1e-9; 10];
        caps[0] = 1.0;
        let s = ProportionalSampler::new(&caps).unwrap();
        let picks = s.sample_distinct(&mut substream(3, 0), 10, 0).unwrap();
        assert_eq!(picks[0], 0);
        assert_eq!(picks.len(), 10);
    }

    #[test]
    fn too_many_positions() {
        let s = ProportionalSampler::new(&[1.0, 2.0]).unwrap();
        assert_eq!(
            s.sample_distinct(&mut substream(0, 0), 3, 10),
            Err(DrawFailure::TooManyPositions {
                requested: 3,
                available: 2
            })
        );
        let b = BetaRankSampler::new(1.0, 1.0).unwrap();
        assert!(b.sample_distinct(&mut substream(0, 0), 3, 2, 10).is_err());
    }

    #[test]
    fn narrow_kernel_runs_out_of_retries() {
        let b = BetaRankSampler::new(1.0, 5000.0).unwrap();
        let err = b.sample_distinct(&mut substream(0, 0), 5, 1000, 20).unwrap_err();
        assert!(matches!(err, DrawFailure::RetriesExhausted { .. }));
    }

    #[test]
    fn rank_mapping() {
        assert_eq!(BetaRankSampler::rank_of(0.0, 10), 1);
        assert_eq!(BetaRankSampler::rank_of(0.1, 10), 1);
        assert_eq!(BetaRankSampler::rank_of(0.11, 10), 2);
        assert_eq!(BetaRankSampler::rank_of(1.0, 10), 10);
    }
}
