//! Monte-Carlo asset selection.
//!
//! Funds below the break point hold equal-weight portfolios sized by the
//! lower branch `W = 10^c n^μ<`, picking securities with probability
//! proportional to capitalization. Funds at or above it pick securities by
//! scaled rank from their bin's Beta kernel and invest `f_max · C_α` in each.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rng::substream;
use super::sampling::{BetaRankSampler, DrawFailure, ProportionalSampler};
use crate::error::{Error, Result};
use crate::metrics::SelectionModel;
use crate::universe::{Position, SecurityRecord, UniverseSnapshot};

fn default_max_retries() -> usize {
    1000
}

/// Inputs that do not depend on the seed or the model: which funds to
/// simulate and the security universe they choose from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub fund_sizes: Vec<usize>,
    pub security_caps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub security_ids: Option<Vec<String>>,
    #[serde(default = "default_max_retries")]
    pub max_retries: usize,
}

impl SimulationPlan {
    /// Fund sizes and capitalizations copied from an observed snapshot.
    pub fn from_snapshot(snapshot: &UniverseSnapshot) -> Self {
        Self {
            fund_sizes: snapshot.funds().iter().map(|f| f.n_positions()).collect(),
            security_caps: snapshot.securities().iter().map(|s| s.capitalization).collect(),
            security_ids: Some(snapshot.securities().iter().map(|s| s.security_id.clone()).collect()),
            max_retries: default_max_retries(),
        }
    }

    fn securities(&self) -> Vec<SecurityRecord> {
        self.security_caps
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let id = match &self.security_ids {
                    Some(ids) => ids[i].clone(),
                    None => format!("S{i:06}"),
                };
                SecurityRecord::new(id, c)
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.security_caps.is_empty() {
            return Err(Error::InvalidParameter("simulation needs at least one security".into()));
        }
        if self.security_caps.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::InvalidParameter("capitalizations must be positive".into()));
        }
        if self.fund_sizes.contains(&0) {
            return Err(Error::InvalidParameter("fund sizes must be at least 1".into()));
        }
        if let Some(ids) = &self.security_ids {
            if ids.len() != self.security_caps.len() {
                return Err(Error::InvalidParameter(
                    "security_ids and security_caps differ in length".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub model: SelectionModel,
    pub plan: SimulationPlan,
}

impl SimConfig {
    /// SHA-256 of the canonical JSON encoding of the config.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub fn fund_id(index: usize) -> String {
    format!("F{index:06}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundFailure {
    pub fund_index: usize,
    pub fund_id: String,
    pub n_i: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub failures: Vec<FundFailure>,
}

#[derive(Debug, Clone)]
pub struct SimulatedUniverse {
    pub snapshot: UniverseSnapshot,
    pub provenance: Provenance,
}

impl SimulatedUniverse {
    pub fn failure_rate(&self) -> f64 {
        let total = self.snapshot.n_funds() + self.provenance.failures.len();
        if total == 0 {
            0.0
        } else {
            self.provenance.failures.len() as f64 / total as f64
        }
    }
}

/// Simulates every fund of the plan. `workers` sets the size of a dedicated
/// thread pool (the global pool when `None`); output does not depend on it.
pub fn simulate_universe(config: &SimConfig, workers: Option<usize>) -> Result<SimulatedUniverse> {
    config.plan.validate()?;
    let run = || simulate_funds(config);
    let results = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }?;

    let mut funds = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (index, result) in results.into_iter().enumerate() {
        match result {
            Ok(positions) => funds.push((fund_id(index), positions)),
            Err(reason) => failures.push(FundFailure {
                fund_index: index,
                fund_id: fund_id(index),
                n_i: config.plan.fund_sizes[index],
                reason,
            }),
        }
    }
    let snapshot = UniverseSnapshot::from_indexed(config.plan.securities(), funds)?;
    Ok(SimulatedUniverse {
        snapshot,
        provenance: Provenance {
            config_sha256: config.sha256(),
            seed: config.seed,
            failures,
        },
    })
}

type FundResult = std::result::Result<Vec<Position>, String>;

fn simulate_funds(config: &SimConfig) -> Result<Vec<FundResult>> {
    let plan = &config.plan;
    let model = &config.model;
    let caps = &plan.security_caps;
    let m = caps.len();
    let proportional = ProportionalSampler::new(caps)?;

    let mut by_rank: Vec<usize> = (0..m).collect();
    let ids = plan.securities();
    by_rank.sort_by(|&a, &b| {
        caps[b]
            .total_cmp(&caps[a])
            .then_with(|| ids[a].security_id.cmp(&ids[b].security_id))
    });

    let kernels: Vec<Option<BetaRankSampler>> = model
        .bins
        .iter()
        .map(|bin| bin.kernel().map(|(a, b, _)| BetaRankSampler::new(a, b)).transpose())
        .collect::<Result<_>>()?;

    Ok(plan
        .fund_sizes
        .par_iter()
        .enumerate()
        .map(|(index, &n)| -> FundResult {
            let mut rng = substream(config.seed, index as u64);
            let describe = |e: DrawFailure| e.to_string();
            if n > m {
                return Err(describe(DrawFailure::TooManyPositions {
                    requested: n,
                    available: m,
                }));
            }
            if model.is_small(n) {
                let value = model.optimal_value(n) / n as f64;
                let picks = proportional
                    .sample_distinct(&mut rng, n, plan.max_retries)
                    .map_err(describe)?;
                Ok(picks.into_iter().map(|security| Position { security, value }).collect())
            } else {
                let slot = model
                    .bins
                    .iter()
                    .position(|b| b.range().contains(n))
                    .ok_or_else(|| format!("no bin covers n = {n}"))?;
                let (Some(sampler), Some((_, _, f_max))) = (&kernels[slot], model.bins[slot].kernel()) else {
                    let bin = &model.bins[slot];
                    return Err(format!("bin [{}, {}) is uncalibrated", bin.lo, bin.hi));
                };
                let ranks = sampler
                    .sample_distinct(&mut rng, n, m, plan.max_retries)
                    .map_err(describe)?;
                Ok(ranks
                    .into_iter()
                    .map(|r| {
                        let security = by_rank[r - 1];
                        Position {
                            security,
                            value: f_max * caps[security],
                        }
                    })
                    .collect())
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ModelBin;

    fn model() -> SelectionModel {
        SelectionModel {
            n_star: 70.0,
            mu_below: 2.0,
            intercept: 0.0,
            bins: vec![
                ModelBin {
                    lo: 64,
                    hi: 128,
                    a: None,
                    b: None,
                    median_fmax: None,
                    count: 0,
                    calibrated: false,
                },
                ModelBin::calibrated(128, 256, 1.0, 1.0, 1e-3),
            ],
        }
    }

    fn config(sizes: Vec<usize>) -> SimConfig {
        SimConfig {
            seed: 9,
            model: model(),
            plan: SimulationPlan {
                fund_sizes: sizes,
                security_caps: (1..=400).map(|i| 1e9 / i as f64).collect(),
                security_ids: None,
                max_retries: 1000,
            },
        }
    }

    #[test]
    fn small_fund_is_equal_weight_on_lower_branch() {
        let sim = simulate_universe(&config(vec![5]), Some(1)).unwrap();
        let fund = &sim.snapshot.funds()[0];
        assert_eq!(fund.n_positions(), 5);
        assert!((fund.total_value() - 25.0).abs() < 1e-12);
        assert!(fund.positions().iter().all(|p| p.value == 5.0));
    }

    #[test]
    fn large_fund_invests_fmax_of_each_cap() {
        let sim = simulate_universe(&config(vec![150]), None).unwrap();
        let fund = &sim.snapshot.funds()[0];
        assert_eq!(fund.n_positions(), 150);
        for p in fund.positions() {
            assert_eq!(p.value, 1e-3 * sim.snapshot.securities()[p.security].capitalization);
        }
    }

    #[test]
    fn failures_are_reported() {
        let sim = simulate_universe(&config(vec![5, 80, 500, 10]), Some(2)).unwrap();
        assert_eq!(sim.snapshot.n_funds(), 2);
        let failed: Vec<_> = sim.provenance.failures.iter().map(|f| (f.fund_index, f.n_i)).collect();
        assert_eq!(failed, [(1, 80), (2, 500)]);
        assert!(sim.provenance.failures[0].reason.contains("uncalibrated"));
        assert!(sim.provenance.failures[1].reason.contains("only 400 securities"));
        assert_eq!(sim.failure_rate(), 0.5);
    }

    #[test]
    fn invalid_plans_are_errors() {
        assert!(simulate_universe(&config(vec![0]), None).is_err());
        let mut c = config(vec![5]);
        c.plan.security_caps[3] = -1.0;
        assert!(simulate_universe(&c, None).is_err());
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let c = config(
            (0..60)
                .map(|i| 5 + (i * 37) % 200)
                .filter(|n| !(64..128).contains(n))
                .collect(),
        );
        let one = simulate_universe(&c, Some(1)).unwrap();
        let four = simulate_universe(&c, Some(4)).unwrap();
        assert_eq!(one.snapshot, four.snapshot);
        assert_eq!(one.provenance, four.provenance);
        assert_eq!(one.provenance.config_sha256.len(), 64);
    }
}
