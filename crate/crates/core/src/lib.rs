//! Portfolio scaling analysis on fund-holdings snapshots.
//!
//! The crate loads a fund/security ownership snapshot, filters it to a
//! fixed point, fits the broken power law linking portfolio value to the
//! number of positions, measures portfolio entropy and liquidity ratios, and
//! calibrates and runs a Monte-Carlo asset-selection model. Synthetic
//! universes with known parameters make every estimator testable end to end.
//!
//! ```
//! use crowd_scaling::metrics::scaled_entropy_of;
//!
//! assert_eq!(scaled_entropy_of(&[2.0, 2.0, 2.0]), 1.0);
//! assert!((scaled_entropy_of(&[0.75, 0.25]) - 0.811278).abs() < 1e-6);
//! ```

// `!(x > 0.0)` is used on purpose: unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimators;
pub mod ingest;
pub mod metrics;
pub mod sim;
pub mod universe;

pub use error::{Error, Result};
