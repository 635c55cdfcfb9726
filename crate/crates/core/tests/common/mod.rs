//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crowd_scaling::ingest::FilterConfig;
use crowd_scaling::universe::{HoldingRow, SecurityRecord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - u.powi(3)).powi(3)
    }
}

fn bisquare(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - u * u).powi(2)
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Local linear fit at `x0` by a direct weighted least-squares solve over all
/// points: neighbourhood size from a full sort of distances, tricube kernel
/// times robustness weights, and a QR solve of the weighted design.
pub fn wls_at(points: &[(f64, f64)], span: f64, robust: &[f64], x0: f64) -> f64 {
    let n = points.len();
    let q = ((span * n as f64 + 1e-7).floor() as usize).clamp(2, n);
    let mut dist: Vec<f64> = points.iter().map(|p| (p.0 - x0).abs()).collect();
    dist.sort_by(f64::total_cmp);
    let h = dist[q - 1];
    let w: Vec<f64> = points
        .iter()
        .zip(robust)
        .map(|(p, r)| tricube((p.0 - x0).abs() / h) * r)
        .collect();
    let active: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
    let sw: f64 = active.iter().map(|&i| w[i]).sum();
    let mean = active.iter().map(|&i| w[i] * points[i].1).sum::<f64>() / sw;
    if active.len() < 2 {
        return mean;
    }
    let a = DMatrix::from_fn(active.len(), 2, |r, c| {
        let i = active[r];
        let sq = w[i].sqrt();
        if c == 0 {
            sq
        } else {
            sq * (points[i].0 - x0)
        }
    });
    let b = DVector::from_fn(active.len(), |r, _| w[active[r]].sqrt() * points[active[r]].1);
    let beta = a.svd(true, true).solve(&b, 1e-14).expect("full rank");
    beta[0]
}

/// Robust LOESS by repeated direct solves.
pub fn loess_oracle(points: &[(f64, f64)], span: f64, iters: usize, eval_at: &[f64]) -> Vec<f64> {
    let mut robust = vec![1.0; points.len()];
    let y_scale = points.iter().map(|p| p.1.abs()).sum::<f64>() / points.len() as f64;
    for _ in 0..iters {
        let residuals: Vec<f64> = points
            .iter()
            .map(|p| p.1 - wls_at(points, span, &robust, p.0))
            .collect();
        let scale = 6.0 * median(&residuals.iter().map(|r| r.abs()).collect::<Vec<_>>());
        if scale <= 1e-12 * y_scale.max(1.0) {
            break;
        }
        robust = residuals.iter().map(|r| bisquare(r / scale)).collect();
    }
    eval_at.iter().map(|&x| wls_at(points, span, &robust, x)).collect()
}

/// Exact inclusion probabilities of `n` successive draws without replacement
/// with probability proportional to the remaining weights (n ≤ 3).
pub fn successive_inclusion(weights: &[f64], n: usize) -> Vec<f64> {
    assert!((1..=3).contains(&n));
    let total: f64 = weights.iter().sum();
    let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let m = p.len();
    let mut incl = vec![0.0; m];
    for i in 0..m {
        incl[i] += p[i];
        if n == 1 {
            continue;
        }
        for j in 0..m {
            if j == i {
                continue;
            }
            let pij = p[i] * p[j] / (1.0 - p[i]);
            incl[j] += pij;
            if n == 2 {
                continue;
            }
            for k in 0..m {
                if k != i && k != j {
                    incl[k] += pij * p[k] / (1.0 - p[i] - p[j]);
                }
            }
        }
    }
    incl
}

/// Removes, all at once, every security and fund failing a filter given the
/// survivors of the previous round, until nothing changes. Returns the ids of
/// the surviving securities and funds.
pub fn brute_force_filter(
    securities: &[SecurityRecord],
    holdings: &[HoldingRow],
    config: &FilterConfig,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut secs: BTreeSet<String> = securities.iter().map(|s| s.security_id.clone()).collect();
    let mut funds: BTreeSet<String> = holdings.iter().map(|h| h.fund_id.clone()).collect();
    loop {
        let mut value: BTreeMap<&str, f64> = BTreeMap::new();
        let mut positions: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let mut investors: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for h in holdings {
            if secs.contains(&h.security_id) && funds.contains(&h.fund_id) {
                *value.entry(&h.fund_id).or_default() += h.value;
                positions.entry(&h.fund_id).or_default().insert(&h.security_id);
                investors.entry(&h.security_id).or_default().insert(&h.fund_id);
            }
        }
        let next_secs: BTreeSet<String> = securities
            .iter()
            .filter(|s| secs.contains(&s.security_id))
            .filter(|s| {
                let m = investors.get(s.security_id.as_str()).map_or(0, |f| f.len());
                s.capitalization > config.min_capitalization
                    && (!config.us_only || s.is_us != Some(false))
                    && s.price.is_none_or(|p| p >= config.min_price)
                    && (!config.require_listed || s.is_exchange_listed != Some(false))
                    && m >= config.min_investors
            })
            .map(|s| s.security_id.clone())
            .collect();
        let next_funds: BTreeSet<String> = funds
            .iter()
            .filter(|f| {
                let n = positions.get(f.as_str()).map_or(0, |p| p.len());
                let w = value.get(f.as_str()).copied().unwrap_or(0.0);
                n > 0 && w > config.min_fund_value && n >= config.min_positions
            })
            .cloned()
            .collect();
        if next_secs == secs && next_funds == funds {
            return (secs, funds);
        }
        secs = next_secs;
        funds = next_funds;
    }
}

/// Noisy broken-line data in log10 space: `n` log-uniform on `[5, 3000]`,
/// lognormal value noise with natural-log sd `sigma`.
pub fn broken_line_data(
    seed: u64,
    count: usize,
    mu_below: f64,
    mu_above: f64,
    n_star: f64,
    sigma: f64,
) -> Vec<(f64, f64)> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, sigma / std::f64::consts::LN_10).unwrap();
    let b = n_star.log10();
    (0..count)
        .map(|_| {
            let u: f64 = r.random_range(5f64.log10()..3000f64.log10());
            let y = 3.0 + mu_below * u + (mu_above - mu_below) * (u - b).max(0.0) + noise.sample(&mut r);
            (u, y)
        })
        .collect()
}

/// Chi-square statistic of `counts` against equal expected cell counts.
pub fn chi_square_uniform(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

/// Upper 0.1% quantile of chi-square with `df` degrees of freedom
/// (Wilson–Hilferty approximation).
pub fn chi_square_critical(df: usize) -> f64 {
    let z = 3.090_232;
    let k = df as f64;
    k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
}
