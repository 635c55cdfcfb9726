//! Simulates a universe from a hand-written selection model: equal-weight
//! funds below the break, Beta-kernel funds with a fixed held fraction above.

use crowd_scaling::metrics::{scaled_entropy, ModelBin, SelectionModel};
use crowd_scaling::sim::{simulate_universe, SimConfig, SimulationPlan};

fn main() -> crowd_scaling::Result<()> {
    let model = SelectionModel {
        n_star: 64.0,
        mu_below: 2.0,
        intercept: 5.0,
        bins: vec![
            ModelBin::calibrated(64, 128, 0.7, 2.5, 3e-4),
            ModelBin::calibrated(128, 256, 0.8, 3.0, 2e-4),
        ],
    };
    let plan = SimulationPlan {
        fund_sizes: vec![8, 16, 32, 63, 64, 100, 200],
        security_caps: (1..=3000).map(|r| 1e12 / (r as f64).powf(1.25)).collect(),
        security_ids: None,
        max_retries: 1000,
    };
    let sim = simulate_universe(&SimConfig { seed: 42, model, plan }, None)?;
    println!("failures: {}", sim.provenance.failures.len());
    for fund in sim.snapshot.funds() {
        println!(
            "{}  n = {:>3}  W = {:.3e}  S = {:.4}",
            fund.fund_id(),
            fund.n_positions(),
            fund.total_value(),
            scaled_entropy(fund).scaled_entropy
        );
    }
    Ok(())
}
