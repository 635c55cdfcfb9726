//! Applies the size and quality filters to a synthetic universe and shows
//! how removals cascade until a fixed point is reached.

use crowd_scaling::ingest::{apply_filters, FilterConfig};
use crowd_scaling::sim::{generate_synthetic_universe, GeneratorParams};

fn main() -> crowd_scaling::Result<()> {
    let universe = generate_synthetic_universe(&GeneratorParams::market_like(1500), 7, None)?.snapshot;
    let config = FilterConfig {
        min_investors: 25,
        min_positions: 10,
        ..FilterConfig::default()
    };
    let (filtered, report) = apply_filters(&universe, &config)?;

    println!(
        "before: {} funds, {} securities",
        universe.n_funds(),
        universe.n_securities()
    );
    for stage in &report.stages {
        println!("  {stage:?}");
    }
    let (funds, securities) = report.total_removed();
    println!(
        "removed {funds} funds and {securities} securities over {} passes",
        report.passes()
    );
    println!(
        "after:  {} funds, {} securities",
        filtered.n_funds(),
        filtered.n_securities()
    );

    // the result is a fixed point: filtering again changes nothing
    let (again, _) = apply_filters(&filtered, &config)?;
    assert_eq!(again, filtered);
    Ok(())
}
