//! The full pipeline in memory: generate a universe with a known law,
//! filter and fit it, calibrate the selection model, simulate from it and
//! fit the simulated universe again.

use crowd_scaling::cli::value_points;
use crowd_scaling::estimators::fit_segmented_multistart;
use crowd_scaling::ingest::{apply_filters, FilterConfig};
use crowd_scaling::metrics::{calibrate, CalibrationConfig};
use crowd_scaling::sim::{generate_synthetic_universe, simulate_universe, GeneratorParams, SimConfig, SimulationPlan};

fn main() -> crowd_scaling::Result<()> {
    let generated = generate_synthetic_universe(&GeneratorParams::market_like(4000), 2, None)?;
    let (observed, _) = apply_filters(&generated.snapshot, &FilterConfig::default())?;
    let fit = fit_segmented_multistart(&value_points(&observed), 5)?;
    println!(
        "observed:  mu< = {:.3}, mu> = {:.3}, n* = {:.1} ({} funds)",
        fit.mu_below,
        fit.mu_above,
        fit.n_star,
        observed.n_funds()
    );

    let model = calibrate(&observed, &fit, &CalibrationConfig::default())?;
    for bin in model.calibrated_bins() {
        let (a, b, f) = bin.kernel().expect("calibrated");
        println!(
            "  bin [{:>4}, {:>4}): Beta({a:.2}, {b:.2}), f_max = {f:.2e}",
            bin.lo, bin.hi
        );
    }

    let config = SimConfig {
        seed: 1,
        model,
        plan: SimulationPlan::from_snapshot(&observed),
    };
    let simulated = simulate_universe(&config, None)?;
    let refit = fit_segmented_multistart(&value_points(&simulated.snapshot), 5)?;
    println!(
        "simulated: mu< = {:.3}, mu> = {:.3}, n* = {:.1} ({} failures)",
        refit.mu_below,
        refit.mu_above,
        refit.n_star,
        simulated.provenance.failures.len()
    );
    Ok(())
}
