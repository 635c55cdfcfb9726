use serde::{Deserialize, Serialize};

use crate::universe::{FundRecord, UniverseSnapshot};

/// Largest fraction of any single security's capitalization held by a fund.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmaxRecord {
    pub fund_id: String,
    pub n_i: usize,
    pub f_max: f64,
}

/// `max_α W_iα / C_α` over the fund's positions.
pub fn fmax(fund: &FundRecord, snapshot: &UniverseSnapshot) -> FmaxRecord {
    let securities = snapshot.securities();
    let f_max = fund
        .positions()
        .iter()
        .map(|p| p.value / securities[p.security].capitalization)
        .fold(0.0, f64::max);
    FmaxRecord {
        fund_id: fund.fund_id().to_string(),
        n_i: fund.n_positions(),
        f_max,
    }
}

pub fn fmax_table(snapshot: &UniverseSnapshot) -> Vec<FmaxRecord> {
    snapshot.funds().iter().map(|f| fmax(f, snapshot)).collect()
}
