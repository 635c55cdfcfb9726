//! Entropy drift of equal-weight portfolios under price fluctuations.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{grid_stream, substream};
use crate::error::{Error, Result};
use crate::metrics::{scaled_entropy_of, SmcCurve, SmcPoint};

/// Per-asset annualized volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSampler {
    /// `σ = median · exp(log_sd · Z)`.
    LogNormal {
        median: f64,
        log_sd: f64,
    },
    Fixed {
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VolatilityConfig {
    /// Number of daily steps.
    pub horizon: usize,
    pub trading_days_per_year: f64,
    pub sigma: SigmaSampler,
}

impl Default for VolatilityConfig {
    fn default() -> Self {
        Self {
            horizon: 63,
            trading_days_per_year: 252.0,
            sigma: SigmaSampler::LogNormal {
                median: 0.4,
                log_sd: 0.4,
            },
        }
    }
}

impl VolatilityConfig {
    pub fn without_fluctuations() -> Self {
        Self {
            sigma: SigmaSampler::Fixed { sigma: 0.0 },
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least one day".into()));
        }
        if !(self.trading_days_per_year > 0.0) {
            return Err(Error::InvalidParameter("trading_days_per_year must be positive".into()));
        }
        match self.sigma {
            SigmaSampler::LogNormal { median, log_sd } if median > 0.0 && log_sd >= 0.0 => Ok(()),
            SigmaSampler::Fixed { sigma } if sigma >= 0.0 => Ok(()),
            other => Err(Error::InvalidParameter(format!("invalid volatility sampler {other:?}"))),
        }
    }

    fn draw_sigma<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.sigma {
            SigmaSampler::LogNormal { median, log_sd } => {
                LogNormal::new(median.ln(), log_sd).expect("validated").sample(rng)
            }
            SigmaSampler::Fixed { sigma } => sigma,
        }
    }

    /// Value multiplier of one position after `horizon` zero-drift
    /// lognormal daily steps with annualized volatility `sigma`.
    pub fn growth_factor<R: Rng + ?Sized>(&self, rng: &mut R, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return 1.0;
        }
        let daily = sigma / self.trading_days_per_year.sqrt();
        let drift = -0.5 * daily * daily;
        let log_growth: f64 = (0..self.horizon)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                drift + daily * z
            })
            .sum();
        log_growth.exp()
    }
}

/// Scaled entropy of an equal-weight portfolio whose positions grew by `factors`.
pub fn terminal_entropy(factors: &[f64]) -> f64 {
    scaled_entropy_of(factors)
}

/// One replica: an `n`-asset equal-weight portfolio evolved over the horizon.
pub fn replica_entropy<R: Rng + ?Sized>(vol: &VolatilityConfig, n: usize, rng: &mut R) -> f64 {
    let factors: Vec<f64> = (0..n)
        .map(|_| {
            let sigma = vol.draw_sigma(rng);
            vol.growth_factor(rng, sigma)
        })
        .collect();
    terminal_entropy(&factors)
}

/// Mean scaled entropy over `replicas` evolved portfolios for each `n`.
pub fn entropy_under_volatility(
    n_values: &[usize],
    vol: &VolatilityConfig,
    replicas: usize,
    seed: u64,
) -> Result<SmcCurve> {
    vol.validate()?;
    if replicas == 0 {
        return Err(Error::InvalidParameter("replicas must be at least 1".into()));
    }
    if n_values.contains(&0) {
        return Err(Error::InvalidParameter("portfolio sizes must be at least 1".into()));
    }
    let mut points: Vec<SmcPoint> = n_values
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let values: Vec<f64> = (0..replicas)
                .into_par_iter()
                .map(|r| replica_entropy(vol, n, &mut substream(seed, grid_stream(k, r))))
                .collect();
            let count = values.len() as f64;
            let mean = values.iter().sum::<f64>() / count;
            let stderr = if values.len() > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0) / count).sqrt()
            } else {
                0.0
            };
            SmcPoint {
                n,
                mean_entropy: mean,
                stderr,
                replicas,
            }
        })
        .collect();
    points.sort_by_key(|p| p.n);
    Ok(SmcCurve { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_terminal_weights() {
        // growth factors 3 : 1 leave weights (0.75, 0.25)
        let s = terminal_entropy(&[3.0, 1.0]);
        assert!((s - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn no_fluctuation_keeps_equal_weights() {
        let curve = entropy_under_volatility(&[2, 7, 300], &VolatilityConfig::without_fluctuations(), 3, 1).unwrap();
        for p in &curve.points {
            assert!((p.mean_entropy - 1.0).abs() < 1e-12);
            assert_eq!(p.stderr, 0.0);
        }
    }

    #[test]
    fn growth_factor_is_mean_one() {
        let vol = VolatilityConfig::default();
        let mut rng = substream(5, 0);
        let n = 20_000;
        let mean = (0..n).map(|_| vol.growth_factor(&mut rng, 0.4)).sum::<f64>() / n as f64;
        // sd of the factor is about 0.2 over a quarter at 40% vol
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn rejects_bad_configs() {
        let vol = VolatilityConfig {
            horizon: 0,
            ..VolatilityConfig::default()
        };
        assert!(entropy_under_volatility(&[5], &vol, 1, 0).is_err());
        assert!(entropy_under_volatility(&[5], &VolatilityConfig::default(), 0, 0).is_err());
        let vol = VolatilityConfig {
            sigma: SigmaSampler::LogNormal {
                median: 0.0,
                log_sd: 0.4,
            },
            ..VolatilityConfig::default()
        };
        assert!(entropy_under_volatility(&[5], &vol, 1, 0).is_err());
    }

    #[test]
    fn replicas_stay_in_unit_interval() {
        let vol = VolatilityConfig {
            sigma: SigmaSampler::Fixed { sigma: 2.0 },
            ..VolatilityConfig::default()
        };
        let mut rng = substream(11, 0);
        for n in [2, 5, 50] {
            for _ in 0..50 {
                let s = replica_entropy(&vol, n, &mut rng);
                assert!((0.0..=1.0).contains(&s));
            }
        }
    }
}
