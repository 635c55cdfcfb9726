mod common;

use common::*;
use crowd_scaling::estimators::SegmentedFit;
use crowd_scaling::metrics::{
    beta_pdf, calibrate, fit_beta, fmax, restricted_entropy, scaled_entropy, selection_density, CalibrationConfig,
    DiversificationBin, SmcCurve, SmcPoint,
};
use crowd_scaling::sim::rng::substream;
use crowd_scaling::sim::ProportionalSampler;
use crowd_scaling::universe::{build_snapshot, HoldingRow, SecurityRecord, UniverseSnapshot};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Beta, Distribution};

fn universe(caps: &[f64], portfolios: &[Vec<(usize, f64)>]) -> UniverseSnapshot {
    let securities = caps
        .iter()
        .enumerate()
        .map(|(i, &c)| SecurityRecord::new(format!("s{i:04}"), c))
        .collect();
    let holdings: Vec<HoldingRow> = portfolios
        .iter()
        .enumerate()
        .flat_map(|(f, p)| {
            p.iter()
                .map(move |&(s, v)| HoldingRow::new(format!("f{f:04}"), format!("s{s:04}"), v))
        })
        .collect();
    build_snapshot(securities, holdings).unwrap().snapshot
}

#[test]
fn uniform_holdings_give_a_flat_density() {
    let m = 400;
    let caps: Vec<f64> = (0..m).map(|i| 1e9 + i as f64).collect();
    let mut r = rng(1);
    let portfolios: Vec<Vec<(usize, f64)>> = (0..500)
        .map(|_| {
            let n = r.random_range(16..32);
            sample(&mut r, m, n).into_iter().map(|s| (s, 1.0)).collect()
        })
        .collect();
    let snapshot = universe(&caps, &portfolios);
    let cells = 20;
    let d = selection_density(&snapshot, DiversificationBin { lo: 16, hi: 32 }, cells).unwrap();
    assert_eq!(d.funds, 500);
    let counts: Vec<usize> = d
        .density
        .iter()
        .map(|v| (v * d.samples.len() as f64 / cells as f64).round() as usize)
        .collect();
    assert_eq!(counts.iter().sum::<usize>(), d.samples.len());
    let chi2 = chi_square_uniform(&counts);
    assert!(chi2 < chi_square_critical(cells - 1), "chi2 {chi2}");
}

#[test]
fn large_cap_holdings_give_a_decreasing_density() {
    let m = 1000;
    let caps: Vec<f64> = (1..=m).map(|r| 1e12 / r as f64).collect();
    let sampler = ProportionalSampler::new(&caps).unwrap();
    let mut rng = substream(4, 0);
    let portfolios: Vec<Vec<(usize, f64)>> = (0..300)
        .map(|_| {
            sampler
                .sample_distinct(&mut rng, 40, 1000)
                .unwrap()
                .into_iter()
                .map(|s| (s, 1.0))
                .collect()
        })
        .collect();
    let snapshot = universe(&caps, &portfolios);
    let d = selection_density(&snapshot, DiversificationBin { lo: 32, hi: 64 }, 5).unwrap();
    assert!(d.density.windows(2).all(|w| w[0] > w[1]), "{:?}", d.density);
}

#[test]
fn every_edge_lands_in_exactly_one_bin() {
    let mut r = rng(2);
    let m = 300;
    let caps: Vec<f64> = (0..m).map(|_| r.random_range(1e6..1e9)).collect();
    let portfolios: Vec<Vec<(usize, f64)>> = (0..200)
        .map(|_| {
            let n = r.random_range(1..200);
            sample(&mut r, m, n).into_iter().map(|s| (s, 1.0)).collect()
        })
        .collect();
    let snapshot = universe(&caps, &portfolios);
    let total: usize = crowd_scaling::metrics::log2_bins(1, 200)
        .into_iter()
        .filter_map(|bin| selection_density(&snapshot, bin, 10).ok())
        .map(|d| d.samples.len())
        .sum();
    assert_eq!(total, snapshot.edge_count());
}

#[test]
fn beta_fit_recovers_generating_parameters() {
    let mut r = rng(3);
    let draw = |a: f64, b: f64, n: usize, r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        let d = Beta::new(a, b).unwrap();
        (0..n).map(|_| d.sample(r)).collect()
    };
    let uniform = fit_beta(&draw(1.0, 1.0, 10_000, &mut r), 1_000_000).unwrap();
    assert!(
        (uniform.a - 1.0).abs() < 0.1 && (uniform.b - 1.0).abs() < 0.1,
        "{uniform:?}"
    );

    let skewed = fit_beta(&draw(0.5, 3.0, 100_000, &mut r), 1_000_000).unwrap();
    assert!(skewed.mle_converged);
    assert!(
        (skewed.a / 0.5 - 1.0).abs() < 0.05 && (skewed.b / 3.0 - 1.0).abs() < 0.05,
        "{skewed:?}"
    );

    // refit from the fitted law
    let again = fit_beta(&draw(skewed.a, skewed.b, 100_000, &mut r), 1_000_000).unwrap();
    assert!((again.a / skewed.a - 1.0).abs() < 0.05 && (again.b / skewed.b - 1.0).abs() < 0.05);

    assert!((beta_pdf(0.5, 2.0, 2.0) - 1.5).abs() < 1e-12);
}

#[test]
fn fmax_spot_values() {
    let caps = [1e6, 1e6, 1e6, 5e3];
    let snapshot = universe(&caps, &[vec![(0, 100.0), (1, 500.0), (2, 2000.0)], vec![(3, 10.0)]]);
    let f = fmax(&snapshot.funds()[0], &snapshot);
    assert!((f.f_max - 2e-3).abs() < 1e-15);
    let single = fmax(&snapshot.funds()[1], &snapshot);
    assert!((single.f_max - 2e-3).abs() < 1e-15);
}

fn two_snapshots(seed: u64) -> (UniverseSnapshot, UniverseSnapshot, Vec<Vec<(usize, f64)>>) {
    let mut r = rng(seed);
    let m = 120;
    let caps: Vec<f64> = (0..m).map(|i| 1e9 + i as f64).collect();
    let before: Vec<Vec<(usize, f64)>> = (0..30)
        .map(|_| {
            let n = r.random_range(4..60);
            sample(&mut r, m, n)
                .into_iter()
                .map(|s| (s, r.random_range(1.0..100.0)))
                .collect()
        })
        .collect();
    // every fund keeps a random half of its positions, revalued
    let after: Vec<Vec<(usize, f64)>> = before
        .iter()
        .map(|p| {
            let keep = sample(&mut r, p.len(), p.len() / 2);
            keep.into_iter()
                .map(|k| (p[k].0, p[k].1 * r.random_range(0.5..2.0)))
                .collect()
        })
        .collect();
    (universe(&caps, &before), universe(&caps, &after), after)
}

#[test]
fn restricted_entropy_matches_direct_recomputation() {
    let (before, after, kept) = two_snapshots(5);
    let smc = SmcCurve {
        points: vec![
            SmcPoint {
                n: 2,
                mean_entropy: 0.9,
                stderr: 0.0,
                replicas: 1,
            },
            SmcPoint {
                n: 100,
                mean_entropy: 0.99,
                stderr: 0.0,
                replicas: 1,
            },
        ],
    };
    let report = restricted_entropy(&before, &after, &smc);
    assert_eq!(report.records.len(), kept.iter().filter(|p| p.len() >= 2).count());
    for rec in &report.records {
        let idx: usize = rec.fund_id[1..].parse().unwrap();
        let values: Vec<f64> = kept[idx].iter().map(|p| p.1).collect();
        let total: f64 = values.iter().sum();
        let h: f64 = values.iter().map(|v| -(v / total) * (v / total).log2()).sum();
        let direct = h / (values.len() as f64).log2();
        assert!((rec.raw_entropy - direct).abs() < 1e-12);
        assert_eq!(rec.n_restricted, values.len());
        assert!((rec.value - direct * smc.at(rec.n_i) / smc.at(rec.n_restricted)).abs() < 1e-12);
    }
    assert!(report.skipped.iter().all(|(_, why)| why.contains("common positions")));
}

#[test]
fn restricted_entropy_identity_and_equal_weights() {
    let (before, _, _) = two_snapshots(6);
    let report = restricted_entropy(&before, &before, &SmcCurve::flat());
    for rec in &report.records {
        let full = scaled_entropy(before.fund(&rec.fund_id).unwrap());
        assert_eq!(rec.n_restricted, rec.n_i);
        assert!((rec.value - full.scaled_entropy).abs() < 1e-12);
    }

    let caps = vec![1e9; 10];
    let a = universe(&caps, &[(0..8).map(|s| (s, 5.0)).collect()]);
    let b = universe(&caps, &[(3..10).map(|s| (s, 2.0)).collect()]);
    let report = restricted_entropy(&a, &b, &SmcCurve::flat());
    assert_eq!(report.records[0].n_restricted, 5);
    assert!((report.records[0].value - 1.0).abs() < 1e-12);
}

#[test]
fn calibration_below_the_break_has_no_kernels() {
    let caps: Vec<f64> = (1..=50).map(|r| 1e9 / r as f64).collect();
    let mut r = rng(7);
    let portfolios: Vec<Vec<(usize, f64)>> = (0..100)
        .map(|_| {
            let n = r.random_range(5..30);
            sample(&mut r, 50, n).into_iter().map(|s| (s, 1.0)).collect()
        })
        .collect();
    let snapshot = universe(&caps, &portfolios);
    let fit = SegmentedFit {
        mu_below: 2.0,
        mu_above: 0.3,
        n_star: 64.0,
        intercept: 0.0,
        log_likelihood: 0.0,
        converged: true,
        iterations: 3,
    };
    let model = calibrate(&snapshot, &fit, &CalibrationConfig::default()).unwrap();
    assert_eq!(model.calibrated_bins().count(), 0);
    let edges: Vec<(usize, usize)> = model.bins.iter().map(|b| (b.lo, b.hi)).collect();
    assert_eq!(edges, [(5, 8), (8, 16), (16, 32)]);
    assert_eq!(model.bins.iter().map(|b| b.count).sum::<usize>(), 100);

    let stalled = SegmentedFit {
        converged: false,
        ..fit
    };
    assert!(calibrate(&snapshot, &stalled, &CalibrationConfig::default()).is_err());
}
