//! Fits `C ∝ m^γ` on securities with at least 100 investors in a synthetic
//! universe.

use crowd_scaling::cli::capitalization_points;
use crowd_scaling::estimators::fit_power_law;
use crowd_scaling::ingest::{apply_filters, FilterConfig};
use crowd_scaling::sim::{generate_synthetic_universe, GeneratorParams};

fn main() -> crowd_scaling::Result<()> {
    let universe = generate_synthetic_universe(&GeneratorParams::market_like(4000), 3, None)?.snapshot;
    let (snapshot, _) = apply_filters(&universe, &FilterConfig::default())?;
    let points: Vec<(f64, f64)> = capitalization_points(&snapshot)
        .into_iter()
        .map(|(m, c)| (10f64.powf(m), 10f64.powf(c)))
        .collect();
    for threshold in [10.0, 30.0, 100.0] {
        let fit = fit_power_law(&points, threshold)?;
        println!(
            "m >= {threshold:>5}: gamma = {:.3} ± {:.3} over {} securities",
            fit.exponent, fit.stderr, fit.n_points
        );
    }
    Ok(())
}
