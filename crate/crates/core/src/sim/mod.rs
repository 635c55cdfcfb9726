//! Monte-Carlo simulation: the asset-selection model, the entropy drift of
//! equal-weight portfolios under price noise, and synthetic universes with
//! known ground truth.

pub mod rng;
pub mod sampling;
pub mod simulate;
pub mod synthetic;
pub mod volatility;

pub use sampling::{BetaRankSampler, DrawFailure, ProportionalSampler};
pub use simulate::{fund_id, simulate_universe, FundFailure, Provenance, SimConfig, SimulatedUniverse, SimulationPlan};
pub use synthetic::{
    generate_synthetic_universe, resolve_model, FundSizeSampler, GeneratorParams, GroundTruth, ModelSpec, ShapeTrend,
    SyntheticUniverse,
};
pub use volatility::{entropy_under_volatility, SigmaSampler, VolatilityConfig};
