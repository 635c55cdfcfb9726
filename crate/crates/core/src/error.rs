use thiserror::Error;

use crate::ingest::FilterReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("duplicate security id `{0}` in security table")]
    DuplicateSecurity(String),

    #[error("security `{id}` has invalid capitalization {value}")]
    InvalidCapitalization { id: String, value: f64 },

    #[error("missing header column `{column}` in {file}")]
    MissingHeader { file: String, column: String },

    #[error("universe is empty after filtering")]
    EmptyAfterFiltering { report: FilterReport },

    #[error("{fit}: too few points ({found}, need at least {needed})")]
    TooFewPoints {
        fit: &'static str,
        found: usize,
        needed: usize,
    },

    #[error("{0}: design is singular (no spread in the regressor)")]
    Singular(&'static str),

    #[error("no detectable break: slope difference {0:e}")]
    NoBreak(f64),

    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    #[error("sample value {0} is outside (0, 1]")]
    SampleOutOfRange(f64),

    #[error("bin [{lo}, {hi}) contains no funds")]
    EmptyBin { lo: usize, hi: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("segmented fit did not converge")]
    NotConverged,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
