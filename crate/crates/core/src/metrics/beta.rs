//! Beta selection kernel over scaled ranks: density and parameter fitting.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 30;
const MLE_TOLERANCE: f64 = 1e-8;
const MLE_MAX_ITERATIONS: usize = 200;

/// Beta density `x^(a-1) (1-x)^(b-1) / B(a, b)`.
pub fn beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)).exp()
}

/// Derivative of the digamma function.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    // asymptotic series in 1/x with Bernoulli coefficients
    acc + r
        + 0.5 * r2
        + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * 5.0 / 66.0))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub a: f64,
    pub b: f64,
    /// Method-of-moments starting point.
    pub moment_a: f64,
    pub moment_b: f64,
    /// False when the likelihood refinement failed and `(a, b)` are the
    /// moment estimates.
    pub mle_converged: bool,
    pub n_samples: usize,
}

/// Fits Beta shape parameters to scaled ranks in `(0, 1]`.
///
/// Samples equal to 1 are moved to `1 − 1/(2M)`, half a rank spacing inside
/// the interval, with `M = universe_size`.
pub fn fit_beta(samples: &[f64], universe_size: usize) -> Result<BetaFit> {
    let nudge = 1.0 - 0.5 / universe_size.max(1) as f64;
    let mut xs = Vec::with_capacity(samples.len());
    for &x in samples {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::SampleOutOfRange(x));
        }
        xs.push(if x == 1.0 { nudge } else { x });
    }
    let xs: Vec<f64> = xs.into_iter().filter(|&x| x > 0.0 && x < 1.0).collect();
    if xs.len() < MIN_SAMPLES {
        return Err(Error::TooFewPoints {
            fit: "beta",
            found: xs.len(),
            needed: MIN_SAMPLES,
        });
    }

    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Err(Error::DegenerateSample("zero variance"));
    }
    let k = mean * (1.0 - mean) / var - 1.0;
    let (moment_a, moment_b) = if k > 0.0 {
        (mean * k, (1.0 - mean) * k)
    } else {
        (mean, 1.0 - mean)
    };

    let mean_ln = xs.iter().map(|x| x.ln()).sum::<f64>() / n;
    let mean_ln1m = xs.iter().map(|x| (1.0 - x).ln()).sum::<f64>() / n;
    let (a, b, mle_converged) = match newton_mle(moment_a, moment_b, mean_ln, mean_ln1m) {
        Some((a, b)) => (a, b, true),
        None => {
            log::warn!("beta likelihood refinement diverged; keeping moment estimates");
            (moment_a, moment_b, false)
        }
    };
    Ok(BetaFit {
        a,
        b,
        moment_a,
        moment_b,
        mle_converged,
        n_samples: xs.len(),
    })
}

/// Solves `ψ(a) − ψ(a+b) = E ln x`, `ψ(b) − ψ(a+b) = E ln(1−x)`.
fn newton_mle(mut a: f64, mut b: f64, mean_ln: f64, mean_ln1m: f64) -> Option<(f64, f64)> {
    let residual = |a: f64, b: f64| {
        let s = digamma(a + b);
        (digamma(a) - s - mean_ln, digamma(b) - s - mean_ln1m)
    };
    for _ in 0..MLE_MAX_ITERATIONS {
        let (g1, g2) = residual(a, b);
        let t = trigamma(a + b);
        let (j11, j12, j22) = (trigamma(a) - t, -t, trigamma(b) - t);
        let det = j11 * j22 - j12 * j12;
        if !det.is_finite() || det <= 0.0 {
            return None;
        }
        let mut da = -(j22 * g1 - j12 * g2) / det;
        let mut db = -(-j12 * g1 + j11 * g2) / det;
        // stay inside the positive quadrant
        while a + da <= 0.0 || b + db <= 0.0 {
            da *= 0.5;
            db *= 0.5;
        }
        a += da;
        b += db;
        if !(a.is_finite() && b.is_finite()) {
            return None;
        }
        if (da / a).abs() < MLE_TOLERANCE && (db / b).abs() < MLE_TOLERANCE {
            return Some((a, b));
        }
    }
    None
}
