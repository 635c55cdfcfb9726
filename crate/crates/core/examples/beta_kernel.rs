//! Draws scaled ranks from a Beta selection kernel and fits the kernel back
//! from the draws.

use crowd_scaling::metrics::{beta_pdf, fit_beta};
use crowd_scaling::sim::rng::substream;
use crowd_scaling::sim::BetaRankSampler;

fn main() -> crowd_scaling::Result<()> {
    let (a, b, m) = (0.6, 3.0, 5000);
    let sampler = BetaRankSampler::new(a, b)?;
    let mut ranks = Vec::new();
    for fund in 0..400 {
        let picks = sampler
            .sample_distinct(&mut substream(11, fund), 100, m, 1000)
            .expect("a 100-position portfolio fits in 5000 securities");
        ranks.extend(picks.into_iter().map(|r| r as f64 / m as f64));
    }
    let fit = fit_beta(&ranks, m)?;
    println!(
        "kernel Beta({a}, {b}); fitted Beta({:.3}, {:.3}) from {} draws",
        fit.a, fit.b, fit.n_samples
    );
    for rho in [0.01, 0.1, 0.3, 0.6, 0.9] {
        println!(
            "  density at rho = {rho:<4}: true {:.3}, fitted {:.3}",
            beta_pdf(rho, a, b),
            beta_pdf(rho, fit.a, fit.b)
        );
    }
    Ok(())
}
