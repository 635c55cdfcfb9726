//! Robust locally weighted linear regression (LOWESS).
//!
//! At every evaluation point a degree-1 polynomial is fitted by weighted least
//! squares over the `q = ⌊span·n⌋` nearest neighbours with tricube weights.
//! Each robustness iteration refits at the data points and multiplies the
//! kernel weights by bisquare weights of the residuals, scaled by six times
//! the median absolute residual.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoessConfig {
    /// Fraction of the points used in each local fit, in `(0, 1]`.
    pub span: f64,
    pub robustness_iters: usize,
}

impl Default for LoessConfig {
    fn default() -> Self {
        Self {
            span: 0.3,
            robustness_iters: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoessCurve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub span: f64,
    /// Robustness iterations actually performed; stops early on an exact fit.
    pub robustness_iters: usize,
}

impl LoessCurve {
    /// Linear interpolation of the curve at `x`, clamped to its ends.
    pub fn interpolate(&self, x: f64) -> f64 {
        let i = self.x.partition_point(|&v| v < x);
        if i == 0 {
            return self.y[0];
        }
        if i == self.x.len() {
            return self.y[self.y.len() - 1];
        }
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let t = (x - x0) / (x1 - x0);
        self.y[i - 1] + t * (self.y[i] - self.y[i - 1])
    }
}

/// `n` evenly spaced abscissae covering `[lo, hi]`.
pub fn evenly_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Fits on `n_eval` evenly spaced abscissae spanning the data (in the
/// same log units as the input).
pub fn loess_on_grid(points: &[(f64, f64)], config: &LoessConfig, n_eval: usize) -> Result<LoessCurve> {
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.0), hi.max(p.0))
    });
    let grid = if hi > lo {
        evenly_spaced(lo, hi, n_eval)
    } else {
        vec![lo]
    };
    loess_fit(points, config, &grid)
}

pub fn loess_fit(points: &[(f64, f64)], config: &LoessConfig, eval_at: &[f64]) -> Result<LoessCurve> {
    if points.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            fit: "loess",
            found: points.len(),
            needed: MIN_POINTS,
        });
    }
    if !(config.span > 0.0 && config.span <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "loess span {} not in (0, 1]",
            config.span
        )));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::InvalidParameter("loess points must be finite".into()));
    }
    if eval_at.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "evaluation abscissae must be strictly increasing".into(),
        ));
    }

    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let smoother = Smoother::new(&sorted, config.span);

    let mut robust = vec![1.0; sorted.len()];
    let mut iters = 0;
    for _ in 0..config.robustness_iters {
        let fitted = smoother.fit_at_data(&robust);
        let residuals: Vec<f64> = sorted.iter().zip(&fitted).map(|(p, f)| p.1 - f).collect();
        let mut abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
        let scale = 6.0 * median(&mut abs);
        let y_scale = sorted.iter().map(|p| p.1.abs()).sum::<f64>() / sorted.len() as f64;
        if scale <= 1e-12 * y_scale.max(1.0) {
            break;
        }
        robust = residuals.iter().map(|r| bisquare(r / scale)).collect();
        iters += 1;
    }

    let y = eval_at.par_iter().map(|&x0| smoother.fit_at(x0, &robust)).collect();
    Ok(LoessCurve {
        x: eval_at.to_vec(),
        y,
        span: config.span,
        robustness_iters: iters,
    })
}

pub(crate) fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

fn bisquare(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u;
        t * t
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

struct Smoother<'a> {
    points: &'a [(f64, f64)],
    xs: Vec<f64>,
    q: usize,
}

impl<'a> Smoother<'a> {
    fn new(points: &'a [(f64, f64)], span: f64) -> Self {
        let n = points.len();
        let q = ((span * n as f64 + 1e-7).floor() as usize).clamp(2, n);
        Self {
            points,
            xs: points.iter().map(|p| p.0).collect(),
            q,
        }
    }

    /// Fitted values at every data point; tied abscissae share one fit.
    fn fit_at_data(&self, robust: &[f64]) -> Vec<f64> {
        let mut starts = Vec::new();
        for i in 0..self.xs.len() {
            if i == 0 || self.xs[i] != self.xs[i - 1] {
                starts.push(i);
            }
        }
        let fits: Vec<f64> = starts.par_iter().map(|&i| self.fit_at(self.xs[i], robust)).collect();
        let mut out = Vec::with_capacity(self.xs.len());
        for (k, &start) in starts.iter().enumerate() {
            let end = starts.get(k + 1).copied().unwrap_or(self.xs.len());
            out.extend(std::iter::repeat_n(fits[k], end - start));
        }
        out
    }

    /// Bandwidth: distance from `x0` to its q-th nearest neighbour, and the
    /// index window `[lo, hi)` holding those neighbours.
    fn neighbourhood(&self, x0: f64) -> (usize, usize, f64) {
        let xs = &self.xs;
        let mut lo = xs.partition_point(|&x| x < x0);
        let mut hi = lo;
        while hi - lo < self.q {
            let left = (lo > 0).then(|| x0 - xs[lo - 1]);
            let right = (hi < xs.len()).then(|| xs[hi] - x0);
            match (left, right) {
                (Some(l), Some(r)) if l <= r => lo -= 1,
                (Some(_), None) => lo -= 1,
                _ => hi += 1,
            }
        }
        let h = (x0 - xs[lo]).max(xs[hi - 1] - x0);
        (lo, hi, h)
    }

    fn fit_at(&self, x0: f64, robust: &[f64]) -> f64 {
        let (mut lo, mut hi, h) = self.neighbourhood(x0);
        let weight = |i: usize| -> f64 {
            let d = (self.xs[i] - x0).abs();
            let k = if h > 0.0 {
                tricube(d / h)
            } else if d == 0.0 {
                1.0
            } else {
                0.0
            };
            k * robust[i]
        };
        if h == 0.0 {
            while lo > 0 && self.xs[lo - 1] == x0 {
                lo -= 1;
            }
            while hi < self.xs.len() && self.xs[hi] == x0 {
                hi += 1;
            }
        }

        let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut effective = 0;
        for i in lo..hi {
            let w = weight(i);
            if w <= 0.0 {
                continue;
            }
            effective += 1;
            let dx = self.xs[i] - x0;
            let y = self.points[i].1;
            sw += w;
            swx += w * dx;
            swy += w * y;
            swxx += w * dx * dx;
            swxy += w * dx * y;
        }

        if sw <= 0.0 {
            // every neighbour was down-weighted to zero; fall back to the kernel mean
            let (s, sy) = (lo..hi).fold((0.0, 0.0), |(s, sy), i| {
                let d = (self.xs[i] - x0).abs();
                let k = if h > 0.0 { tricube(d / h) } else { 1.0 };
                (s + k, sy + k * self.points[i].1)
            });
            return if s > 0.0 {
                sy / s
            } else {
                (lo..hi).map(|i| self.points[i].1).sum::<f64>() / (hi - lo) as f64
            };
        }
        let mean = swy / sw;
        let denom = sw * swxx - swx * swx;
        if effective < 2 || denom <= 1e-12 * sw * swxx {
            return mean;
        }
        let slope = (sw * swxy - swx * swy) / denom;
        (swy - slope * swx) / sw
    }
}
