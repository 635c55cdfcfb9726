//! Per-fund and per-bin diagnostics, and calibration of the selection model.

pub mod beta;
pub mod calibrate;
pub mod entropy;
pub mod fraction;
pub mod selection;

pub use beta::{beta_pdf, fit_beta, BetaFit};
pub use calibrate::{calibrate, CalibrationConfig, ModelBin, SelectionModel};
pub use entropy::{
    entropy_table, restricted_entropy, scaled_entropy, scaled_entropy_of, EntropyRecord, RestrictedEntropyRecord,
    RestrictedEntropyReport, SmcCurve, SmcPoint,
};
pub use fraction::{fmax, fmax_table, FmaxRecord};
pub use selection::{log2_bins, selection_density, DiversificationBin, SelectionDensity};
