//! Regression machinery: robust local regression, log-log power-law fits and
//! the continuous broken-line (break-point) model.

pub mod loess;
pub mod power_law;
pub mod segmented;

pub use loess::{loess_fit, LoessConfig, LoessCurve};
pub use power_law::{fit_power_law, PowerLawFit};
pub use segmented::{fit_segmented, fit_segmented_multistart, SegmentedFit, SegmentedOptions};

use nalgebra::{DMatrix, DVector};

/// Ordinary least squares via the normal equations. Returns the
/// coefficients, the residual sum of squares and `(XᵀX)⁻¹`.
pub(crate) fn ols(
    rows: impl Iterator<Item = (Vec<f64>, f64)>,
    n_params: usize,
) -> Option<(DVector<f64>, f64, DMatrix<f64>)> {
    let mut xtx = DMatrix::<f64>::zeros(n_params, n_params);
    let mut xty = DVector::<f64>::zeros(n_params);
    let mut stored = Vec::new();
    for (x, y) in rows {
        for i in 0..n_params {
            xty[i] += x[i] * y;
            for j in 0..n_params {
                xtx[(i, j)] += x[i] * x[j];
            }
        }
        stored.push((x, y));
    }
    let chol = xtx.cholesky()?;
    let beta = chol.solve(&xty);
    let rss = stored
        .iter()
        .map(|(x, y)| {
            let fit: f64 = x.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
            (y - fit).powi(2)
        })
        .sum();
    Some((beta, rss, chol.inverse()))
}
