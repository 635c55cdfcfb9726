//! Synthetic universes with known ground truth.
//!
//! Capitalizations are Pareto distributed, fund sizes come from a sampler,
//! and holdings are produced by [`simulate_universe`] from a selection model
//! that is either given explicitly or derived from a broken power law.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal, Pareto};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::rng::{substream, CAPITALIZATION_STREAM, FUND_SIZE_STREAM, KERNEL_STREAM_BASE, NOISE_STREAM_BASE};
use super::sampling::BetaRankSampler;
use super::simulate::{simulate_universe, FundFailure, SimConfig, SimulationPlan};
use crate::error::{Error, Result};
use crate::metrics::{log2_bins, DiversificationBin, ModelBin, SelectionModel};
use crate::universe::{Position, UniverseSnapshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FundSizeSampler {
    LogUniform {
        min: usize,
        max: usize,
    },
    /// Rounded lognormal with the given median, truncated to `[min, max]`.
    LogNormal {
        median: f64,
        log_sd: f64,
        min: usize,
        max: usize,
    },
    Explicit {
        sizes: Vec<usize>,
    },
}

impl FundSizeSampler {
    fn draw_all<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<usize>> {
        match self {
            Self::LogUniform { min, max } if 1 <= *min && min <= max => {
                let (lo, hi) = ((*min as f64).ln(), (*max as f64 + 1.0).ln());
                Ok((0..count)
                    .map(|_| (rng.random_range(lo..hi).exp().floor() as usize).clamp(*min, *max))
                    .collect())
            }
            Self::LogNormal {
                median,
                log_sd,
                min,
                max,
            } if *median > 0.0 && *log_sd >= 0.0 && 1 <= *min && min <= max => {
                let d = LogNormal::new(median.ln(), *log_sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok((0..count)
                    .map(|_| loop {
                        let n = d.sample(rng).round();
                        if n >= *min as f64 && n <= *max as f64 {
                            break n as usize;
                        }
                    })
                    .collect())
            }
            Self::Explicit { sizes } if !sizes.is_empty() => Ok((0..count).map(|i| sizes[i % sizes.len()]).collect()),
            other => Err(Error::InvalidParameter(format!("invalid fund size sampler {other:?}"))),
        }
    }
}

/// Linear trend of a Beta shape parameter in `log2(n / n*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeTrend {
    pub at_break: f64,
    pub per_doubling: f64,
}

impl ShapeTrend {
    fn at(&self, n: f64, n_star: f64) -> f64 {
        (self.at_break + self.per_doubling * (n / n_star).log2()).max(0.05)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Explicit {
        model: SelectionModel,
    },
    /// Kernels follow `a`/`b` trends; each bin's `f_max` is chosen so that
    /// the expected portfolio value at the bin midpoint follows `W ∝ n^μ>`
    /// above the break, continuing the lower branch. Generated funds are
    /// rescaled within their bin so the expectation tracks the law at every
    /// `n`, not just the midpoint.
    BrokenPowerLaw {
        n_star: f64,
        mu_below: f64,
        mu_above: f64,
        intercept: f64,
        a: ShapeTrend,
        b: ShapeTrend,
    },
}

fn default_cap_min() -> f64 {
    1e8
}

fn default_max_retries() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n_securities: usize,
    pub n_funds: usize,
    pub cap_pareto_exponent: f64,
    #[serde(default = "default_cap_min")]
    pub cap_min: f64,
    pub fund_sizes: FundSizeSampler,
    pub model: ModelSpec,
    /// Log-sd of a per-fund lognormal factor applied to all of its
    /// positions; zero keeps the model's values exactly.
    #[serde(default)]
    pub value_noise_log_sd: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: usize,
}

impl GeneratorParams {
    /// Heavy-tailed universe with a break at 70 positions, lower exponent
    /// 2.1 and upper exponent 0.3. At a few thousand funds it also gives a
    /// capitalization/investor exponent near 2.2 for `m >= 100` and typical
    /// `f_max` around `10^-3`.
    pub fn market_like(n_funds: usize) -> Self {
        Self {
            n_securities: 5000,
            n_funds,
            cap_pareto_exponent: 0.8,
            cap_min: 5e8,
            fund_sizes: FundSizeSampler::LogNormal {
                median: 60.0,
                log_sd: 1.0,
                min: 5,
                max: 3000,
            },
            model: ModelSpec::BrokenPowerLaw {
                n_star: 70.0,
                mu_below: 2.1,
                mu_above: 0.3,
                intercept: 5.7,
                a: ShapeTrend {
                    at_break: 0.7,
                    per_doubling: 0.05,
                },
                b: ShapeTrend {
                    at_break: 2.5,
                    per_doubling: 0.3,
                },
            },
            value_noise_log_sd: 0.5,
            max_retries: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub params: GeneratorParams,
    /// The selection model actually used to generate holdings.
    pub model: SelectionModel,
    pub failures: Vec<FundFailure>,
}

#[derive(Debug, Clone)]
pub struct SyntheticUniverse {
    pub snapshot: UniverseSnapshot,
    pub truth: GroundTruth,
}

/// Capitalizations drawn from `Pareto(cap_min, exponent)`.
pub fn draw_capitalizations(params: &GeneratorParams, seed: u64) -> Result<Vec<f64>> {
    let d =
        Pareto::new(params.cap_min, params.cap_pareto_exponent).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = substream(seed, CAPITALIZATION_STREAM);
    Ok((0..params.n_securities).map(|_| d.sample(&mut rng)).collect())
}

/// Expected capitalization of a security picked by one Beta-kernel draw.
pub fn expected_cap_under_kernel(sorted_desc: &[f64], a: f64, b: f64) -> f64 {
    let m = sorted_desc.len() as f64;
    let mut prev = 0.0;
    sorted_desc
        .iter()
        .enumerate()
        .map(|(r, c)| {
            let cdf = beta_reg(a, b, ((r + 1) as f64 / m).min(1.0));
            let p = cdf - prev;
            prev = cdf;
            p * c
        })
        .sum()
}

/// Replicas behind each bin's typical portfolio capitalization.
const TYPICAL_CAP_REPLICAS: usize = 400;

/// Geometric mean, over kernel-drawn portfolios of `n` distinct securities,
/// of the summed capitalization. Capitalizations are heavy-tailed, so this
/// sits well below `n` times [`expected_cap_under_kernel`]; matching it makes
/// `log W` rather than `W` follow the target law.
pub fn typical_portfolio_cap(sorted_desc: &[f64], a: f64, b: f64, n: usize, seed: u64, stream: u64) -> Result<f64> {
    let sampler = BetaRankSampler::new(a, b)?;
    let m = sorted_desc.len();
    let mut rng = substream(seed, stream);
    let mut log_sum = 0.0;
    let mut count = 0usize;
    for _ in 0..TYPICAL_CAP_REPLICAS {
        if let Ok(ranks) = sampler.sample_distinct(&mut rng, n.min(m), m, 1000) {
            log_sum += ranks.iter().map(|&r| sorted_desc[r - 1]).sum::<f64>().ln();
            count += 1;
        }
    }
    if count == 0 {
        // portfolios this wide cannot be drawn; the whole-universe
        // expectation is the only meaningful scale left
        log::warn!("kernel ({a}, {b}) cannot place {n} distinct positions; using the expected sum");
        return Ok(n.min(m) as f64 * expected_cap_under_kernel(sorted_desc, a, b));
    }
    Ok((log_sum / count as f64).exp())
}

/// Geometric midpoint of the part of `range` at or above the break.
fn bin_midpoint(range: DiversificationBin, n_star: f64) -> f64 {
    let lo = (range.lo as f64).max(n_star.ceil());
    (lo * (range.hi - 1) as f64).sqrt().max(lo)
}

/// Per-fund value multiplier that bends the linear-in-`n` expectation of a
/// constant-`f` bin onto the upper power law: `(n / mid)^(μ> − 1)`.
fn trend_factor(spec: &ModelSpec, model: &SelectionModel, n: usize) -> f64 {
    match *spec {
        ModelSpec::BrokenPowerLaw { n_star, mu_above, .. } if !model.is_small(n) => {
            model.bin_for(n).map_or(1.0, |bin| {
                (n as f64 / bin_midpoint(bin.range(), n_star)).powf(mu_above - 1.0)
            })
        }
        _ => 1.0,
    }
}

/// Resolves a model spec against concrete capitalizations; `seed` drives the
/// draws that size each bin's `f_max`.
pub fn resolve_model(spec: &ModelSpec, caps: &[f64], max_n: usize, seed: u64) -> Result<SelectionModel> {
    match spec {
        ModelSpec::Explicit { model } => Ok(model.clone()),
        &ModelSpec::BrokenPowerLaw {
            n_star,
            mu_below,
            mu_above,
            intercept,
            a,
            b,
        } => {
            if !(n_star > 0.0) {
                return Err(Error::InvalidParameter("n_star must be positive".into()));
            }
            let mut sorted = caps.to_vec();
            sorted.sort_by(|x, y| y.total_cmp(x));
            let log_w_break = intercept + mu_below * n_star.log10();
            let bins = log2_bins(1, max_n)
                .into_iter()
                .enumerate()
                .map(|(k, range)| {
                    if (range.hi as f64) <= n_star {
                        return Ok(ModelBin {
                            lo: range.lo,
                            hi: range.hi,
                            a: None,
                            b: None,
                            median_fmax: None,
                            count: 0,
                            calibrated: false,
                        });
                    }
                    let mid = bin_midpoint(range, n_star);
                    let (ka, kb) = (a.at(mid, n_star), b.at(mid, n_star));
                    let w_target = 10f64.powf(log_w_break + mu_above * (mid / n_star).log10());
                    let typical = typical_portfolio_cap(
                        &sorted,
                        ka,
                        kb,
                        mid.round() as usize,
                        seed,
                        KERNEL_STREAM_BASE + k as u64,
                    )?;
                    Ok(ModelBin::calibrated(range.lo, range.hi, ka, kb, w_target / typical))
                })
                .collect::<Result<_>>()?;
            Ok(SelectionModel {
                n_star,
                mu_below,
                intercept,
                bins,
            })
        }
    }
}

pub fn generate_synthetic_universe(
    params: &GeneratorParams,
    seed: u64,
    workers: Option<usize>,
) -> Result<SyntheticUniverse> {
    if params.n_securities == 0 || params.n_funds == 0 {
        return Err(Error::InvalidParameter(
            "need at least one security and one fund".into(),
        ));
    }
    if !(params.value_noise_log_sd >= 0.0) {
        return Err(Error::InvalidParameter("value_noise_log_sd must be >= 0".into()));
    }
    let caps = draw_capitalizations(params, seed)?;
    let sizes = params
        .fund_sizes
        .draw_all(&mut substream(seed, FUND_SIZE_STREAM), params.n_funds)?;
    let max_n = sizes.iter().copied().max().unwrap_or(1);
    let model = resolve_model(&params.model, &caps, max_n, seed)?;

    let config = SimConfig {
        seed,
        model: model.clone(),
        plan: SimulationPlan {
            fund_sizes: sizes,
            security_caps: caps,
            security_ids: None,
            max_retries: params.max_retries,
        },
    };
    let sim = simulate_universe(&config, workers)?;
    let normal = Normal::new(0.0, params.value_noise_log_sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let snapshot = rescale_funds(&sim.snapshot, |k, n| {
        let noise = if params.value_noise_log_sd > 0.0 {
            normal.sample(&mut substream(seed, NOISE_STREAM_BASE + k as u64)).exp()
        } else {
            1.0
        };
        trend_factor(&params.model, &model, n) * noise
    })?;
    Ok(SyntheticUniverse {
        snapshot,
        truth: GroundTruth {
            seed,
            params: params.clone(),
            model,
            failures: sim.provenance.failures,
        },
    })
}

/// Multiplies every position of the `k`-th fund (with `n` positions) by
/// `factor(k, n)`. Weights within a fund are unchanged.
fn rescale_funds(snapshot: &UniverseSnapshot, factor: impl Fn(usize, usize) -> f64) -> Result<UniverseSnapshot> {
    let funds = snapshot
        .funds()
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let factor = factor(k, f.n_positions());
            let positions = f
                .positions()
                .iter()
                .map(|p| Position {
                    security: p.security,
                    value: p.value * factor,
                })
                .collect();
            (f.fund_id().to_string(), positions)
        })
        .collect();
    UniverseSnapshot::from_indexed(snapshot.securities().to_vec(), funds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke_params() -> GeneratorParams {
        GeneratorParams {
            n_securities: 10,
            n_funds: 3,
            cap_pareto_exponent: 1.2,
            cap_min: 1e8,
            fund_sizes: FundSizeSampler::LogUniform { min: 2, max: 6 },
            model: ModelSpec::Explicit {
                model: SelectionModel {
                    n_star: 70.0,
                    mu_below: 2.0,
                    intercept: 4.0,
                    bins: vec![],
                },
            },
            value_noise_log_sd: 0.0,
            max_retries: 1000,
        }
    }

    #[test]
    fn smoke_universe_is_valid() {
        let u = generate_synthetic_universe(&smoke_params(), 3, None).unwrap();
        let s = &u.snapshot;
        assert_eq!(s.n_securities(), 10);
        assert_eq!(s.n_funds(), 3);
        let sum_n: usize = s.funds().iter().map(|f| f.n_positions()).sum();
        assert_eq!(sum_n, s.edge_count());
        assert!(u.truth.failures.is_empty());
        assert!(s.securities().iter().all(|c| c.capitalization >= 1e8));
    }

    #[test]
    fn noise_keeps_weights() {
        let mut p = smoke_params();
        p.value_noise_log_sd = 0.5;
        let noisy = generate_synthetic_universe(&p, 3, None).unwrap();
        let clean = generate_synthetic_universe(&smoke_params(), 3, None).unwrap();
        for (a, b) in noisy.snapshot.funds().iter().zip(clean.snapshot.funds()) {
            let ratio = a.total_value() / b.total_value();
            assert_ne!(ratio, 1.0);
            for (pa, pb) in a.positions().iter().zip(b.positions()) {
                assert_eq!(pa.security, pb.security);
                assert!((pa.value / pb.value / ratio - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn expected_cap_of_uniform_kernel_is_mean_cap() {
        let caps = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert!((expected_cap_under_kernel(&caps, 1.0, 1.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn broken_power_law_model_covers_large_bins() {
        let caps: Vec<f64> = (1..=1000).map(|i| 1e9 / i as f64).collect();
        let spec = GeneratorParams::market_like(10).model;
        let model = resolve_model(&spec, &caps, 3000, 1).unwrap();
        assert_eq!(model.n_star, 70.0);
        assert!(model.bin_for(70).unwrap().calibrated);
        assert!(!model.bin_for(60).unwrap().calibrated);
        assert!(model.bin_for(3000).unwrap().calibrated);
        assert!(model.calibrated_bins().all(|b| b.median_fmax.unwrap() > 0.0));
    }

    #[test]
    fn samplers_respect_bounds() {
        let mut rng = substream(1, 0);
        let sizes = FundSizeSampler::LogNormal {
            median: 60.0,
            log_sd: 1.0,
            min: 5,
            max: 3000,
        }
        .draw_all(&mut rng, 2000)
        .unwrap();
        assert!(sizes.iter().all(|&n| (5..=3000).contains(&n)));
        let sizes = FundSizeSampler::LogUniform { min: 5, max: 9 }
            .draw_all(&mut rng, 500)
            .unwrap();
        assert!(sizes.iter().all(|&n| (5..=9).contains(&n)));
        assert!(sizes.contains(&9));
        assert!(FundSizeSampler::Explicit { sizes: vec![] }
            .draw_all(&mut rng, 1)
            .is_err());
    }
}
