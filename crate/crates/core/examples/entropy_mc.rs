//! Expected scaled entropy of initially equal-weight portfolios after a
//! quarter of lognormal price moves, as a function of portfolio size.

use crowd_scaling::sim::{entropy_under_volatility, VolatilityConfig};

fn main() -> crowd_scaling::Result<()> {
    let curve = entropy_under_volatility(&[2, 5, 20, 100, 1000], &VolatilityConfig::default(), 500, 1)?;
    for point in &curve.points {
        println!(
            "n = {:>4}: S = {:.5} ± {:.5}",
            point.n, point.mean_entropy, point.stderr
        );
    }
    Ok(())
}
