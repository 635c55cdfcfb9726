//! Robust LOESS on a noisy curve with a few gross outliers, with and
//! without robustness iterations.

use crowd_scaling::estimators::{loess_fit, LoessConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> crowd_scaling::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut points: Vec<(f64, f64)> = (0..300)
        .map(|_| {
            let x: f64 = rng.random_range(0.0..6.0);
            (x, x.sin() + 0.2 * (rng.random::<f64>() - 0.5))
        })
        .collect();
    for p in points.iter_mut().step_by(37) {
        p.1 += 5.0;
    }

    let grid: Vec<f64> = (0..=12).map(|i| 0.5 * i as f64).collect();
    let plain = loess_fit(
        &points,
        &LoessConfig {
            span: 0.3,
            robustness_iters: 0,
        },
        &grid,
    )?;
    let robust = loess_fit(
        &points,
        &LoessConfig {
            span: 0.3,
            robustness_iters: 3,
        },
        &grid,
    )?;
    println!("{:>5} {:>8} {:>8} {:>8}", "x", "sin x", "plain", "robust");
    for (i, x) in grid.iter().enumerate() {
        println!("{x:>5.1} {:>8.3} {:>8.3} {:>8.3}", x.sin(), plain.y[i], robust.y[i]);
    }
    Ok(())
}
