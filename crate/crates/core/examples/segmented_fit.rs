//! Recovers a broken power law `W ∝ n^μ` with a break at `n*` from noisy
//! data by multistart segmented regression.

use crowd_scaling::estimators::fit_segmented_multistart;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> crowd_scaling::Result<()> {
    let (mu_below, mu_above, n_star): (f64, f64, f64) = (2.0, 0.3, 70.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.2).expect("valid sd");
    let points: Vec<(f64, f64)> = (0..5000)
        .map(|_| {
            let u: f64 = rng.random_range(5f64.log10()..3000f64.log10());
            let y = 4.0 + mu_below * u + (mu_above - mu_below) * (u - n_star.log10()).max(0.0);
            (u, y + noise.sample(&mut rng))
        })
        .collect();

    let fit = fit_segmented_multistart(&points, 5)?;
    println!("true:   mu< = {mu_below}, mu> = {mu_above}, n* = {n_star}");
    println!(
        "fitted: mu< = {:.3}, mu> = {:.3}, n* = {:.1} (converged: {}, {} iterations)",
        fit.mu_below, fit.mu_above, fit.n_star, fit.converged, fit.iterations
    );
    Ok(())
}
