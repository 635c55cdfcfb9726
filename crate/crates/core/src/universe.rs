//! In-memory model of one holdings snapshot: the bipartite graph between
//! funds and securities, with the per-node aggregates used everywhere else.
//!
//! Funds keep their holdings as a sparse row of `(security index, value)`
//! pairs sorted by security index. Security indices refer to positions in
//! [`UniverseSnapshot::securities`].

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One security and its capitalization `C_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityRecord {
    pub security_id: String,
    /// Market capitalization in USD, strictly positive.
    pub capitalization: f64,
    pub price: Option<f64>,
    pub is_us: Option<bool>,
    pub is_exchange_listed: Option<bool>,
}

impl SecurityRecord {
    /// A security with only a capitalization; metadata columns left unknown.
    pub fn new(security_id: impl Into<String>, capitalization: f64) -> Self {
        Self {
            security_id: security_id.into(),
            capitalization,
            price: None,
            is_us: None,
            is_exchange_listed: None,
        }
    }
}

/// One raw holdings row before aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldingRow {
    pub fund_id: String,
    pub security_id: String,
    pub value: f64,
}

impl HoldingRow {
    pub fn new(fund_id: impl Into<String>, security_id: impl Into<String>, value: f64) -> Self {
        Self {
            fund_id: fund_id.into(),
            security_id: security_id.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    /// Index into the snapshot's security table.
    pub security: usize,
    /// Position value `W_iα` in USD, strictly positive.
    pub value: f64,
}

/// A fund and its sparse holdings row.
#[derive(Debug, Clone, PartialEq)]
pub struct FundRecord {
    fund_id: String,
    positions: Vec<Position>,
    total_value: f64,
}

impl FundRecord {
    /// Builds a fund from raw positions. Entries on the same security are
    /// summed and the row is sorted by security index.
    pub(crate) fn from_positions(fund_id: String, mut positions: Vec<Position>) -> Self {
        positions.sort_by_key(|p| p.security);
        positions.dedup_by(|later, earlier| {
            if later.security == earlier.security {
                earlier.value += later.value;
                true
            } else {
                false
            }
        });
        let total_value = positions.iter().map(|p| p.value).sum();
        Self {
            fund_id,
            positions,
            total_value,
        }
    }

    pub fn fund_id(&self) -> &str {
        &self.fund_id
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    /// Diversification `n_i`.
    pub fn n_positions(&self) -> usize {
        self.positions.len()
    }

    /// Portfolio value `W_i`, the sum of reported long positions.
    pub fn total_value(&self) -> f64 {
        self.total_value
    }

    /// Value held in the security at `index`, if any.
    pub fn value_of(&self, index: usize) -> Option<f64> {
        self.positions
            .binary_search_by_key(&index, |p| p.security)
            .ok()
            .map(|i| self.positions[i].value)
    }
}

/// A row that could not be turned into a position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub snapshot: UniverseSnapshot,
    pub rejects: Vec<RejectedRow>,
}

/// Immutable snapshot of the fund/security ownership graph.
#[derive(Debug, Clone, PartialEq)]
pub struct UniverseSnapshot {
    pub as_of: Option<String>,
    securities: Vec<SecurityRecord>,
    index: HashMap<String, usize>,
    funds: Vec<FundRecord>,
    investors: Vec<usize>,
}

/// Builds a snapshot from a security table and raw holdings rows.
///
/// Rows naming an unknown security or carrying a non-positive value are
/// reported in [`BuildOutcome::rejects`] with their 1-based row ordinal.
/// Repeated `(fund, security)` rows are summed.
pub fn build_snapshot(
    securities: Vec<SecurityRecord>,
    holdings: impl IntoIterator<Item = HoldingRow>,
) -> Result<BuildOutcome> {
    build_with_lines(
        securities,
        holdings.into_iter().enumerate().map(|(i, row)| (i + 1, row)),
    )
}

pub(crate) fn build_with_lines(
    securities: Vec<SecurityRecord>,
    holdings: impl IntoIterator<Item = (usize, HoldingRow)>,
) -> Result<BuildOutcome> {
    if securities.is_empty() {
        return Err(Error::EmptyInput("security table"));
    }
    let index = security_index(&securities)?;

    let mut fund_slot: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<(String, Vec<Position>)> = Vec::new();
    let mut rejects = Vec::new();
    let mut seen_rows = 0usize;

    for (line, row) in holdings {
        seen_rows += 1;
        let Some(&security) = index.get(&row.security_id) else {
            rejects.push(RejectedRow {
                line,
                reason: format!("unknown security_id `{}`", row.security_id),
            });
            continue;
        };
        if !row.value.is_finite() || row.value <= 0.0 {
            rejects.push(RejectedRow {
                line,
                reason: "non-positive value".to_string(),
            });
            continue;
        }
        let slot = *fund_slot.entry(row.fund_id.clone()).or_insert_with(|| {
            rows.push((row.fund_id.clone(), Vec::new()));
            rows.len() - 1
        });
        rows[slot].1.push(Position {
            security,
            value: row.value,
        });
    }

    if seen_rows == 0 {
        return Err(Error::EmptyInput("holdings"));
    }

    let funds = rows
        .into_iter()
        .map(|(id, positions)| FundRecord::from_positions(id, positions))
        .collect();
    Ok(BuildOutcome {
        snapshot: UniverseSnapshot::assemble(securities, index, funds),
        rejects,
    })
}

fn security_index(securities: &[SecurityRecord]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(securities.len());
    for (i, s) in securities.iter().enumerate() {
        if !s.capitalization.is_finite() || s.capitalization <= 0.0 {
            return Err(Error::InvalidCapitalization {
                id: s.security_id.clone(),
                value: s.capitalization,
            });
        }
        if index.insert(s.security_id.clone(), i).is_some() {
            return Err(Error::DuplicateSecurity(s.security_id.clone()));
        }
    }
    Ok(index)
}

impl UniverseSnapshot {
    /// Assembles a snapshot from already-indexed fund rows.
    pub(crate) fn from_indexed(securities: Vec<SecurityRecord>, funds: Vec<(String, Vec<Position>)>) -> Result<Self> {
        if securities.is_empty() {
            return Err(Error::EmptyInput("security table"));
        }
        let index = security_index(&securities)?;
        let funds = funds
            .into_iter()
            .map(|(id, positions)| FundRecord::from_positions(id, positions))
            .filter(|f| f.n_positions() > 0)
            .collect();
        Ok(Self::assemble(securities, index, funds))
    }

    fn assemble(securities: Vec<SecurityRecord>, index: HashMap<String, usize>, funds: Vec<FundRecord>) -> Self {
        let mut investors = vec![0usize; securities.len()];
        for fund in &funds {
            for p in &fund.positions {
                investors[p.security] += 1;
            }
        }
        Self {
            as_of: None,
            securities,
            index,
            funds,
            investors,
        }
    }

    pub fn with_as_of(mut self, as_of: impl Into<String>) -> Self {
        self.as_of = Some(as_of.into());
        self
    }

    pub fn securities(&self) -> &[SecurityRecord] {
        &self.securities
    }

    pub fn funds(&self) -> &[FundRecord] {
        &self.funds
    }

    /// Number of securities `M`.
    pub fn n_securities(&self) -> usize {
        self.securities.len()
    }

    pub fn n_funds(&self) -> usize {
        self.funds.len()
    }

    pub fn security_index(&self, security_id: &str) -> Option<usize> {
        self.index.get(security_id).copied()
    }

    pub fn fund(&self, fund_id: &str) -> Option<&FundRecord> {
        self.funds.iter().find(|f| f.fund_id == fund_id)
    }

    /// Investor counts `m_α`, aligned with [`Self::securities`].
    pub fn investor_counts(&self) -> &[usize] {
        &self.investors
    }

    /// Total number of (fund, security) edges.
    pub fn edge_count(&self) -> usize {
        self.investors.iter().sum()
    }

    /// Security indices ordered by capitalization rank: largest first,
    /// ties broken by ascending id.
    pub fn securities_by_rank(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.securities.len()).collect();
        order.sort_by(|&a, &b| rank_order(&self.securities[a], &self.securities[b]));
        order
    }

    /// Capitalization ranks `r_α` (1 = largest), aligned with the security table.
    pub fn capitalization_ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.securities.len()];
        for (r, &i) in self.securities_by_rank().iter().enumerate() {
            ranks[i] = r + 1;
        }
        ranks
    }

    /// Scaled ranks `ρ_α = r_α / M`, aligned with the security table.
    pub fn scaled_ranks(&self) -> Vec<f64> {
        let m = self.securities.len() as f64;
        self.capitalization_ranks().into_iter().map(|r| r as f64 / m).collect()
    }

    /// Scaled ranks keyed by security id.
    pub fn scaled_capitalization_ranks(&self) -> HashMap<String, f64> {
        self.scaled_ranks()
            .into_iter()
            .zip(&self.securities)
            .map(|(rho, s)| (s.security_id.clone(), rho))
            .collect()
    }

    /// Keeps the flagged securities and funds. Positions on dropped
    /// securities are removed from their funds; funds left without any
    /// position are dropped as well.
    pub fn restrict(&self, keep_security: &[bool], keep_fund: &[bool]) -> Self {
        debug_assert_eq!(keep_security.len(), self.securities.len());
        debug_assert_eq!(keep_fund.len(), self.funds.len());

        let mut remap = vec![usize::MAX; self.securities.len()];
        let mut securities = Vec::new();
        for (i, s) in self.securities.iter().enumerate() {
            if keep_security[i] {
                remap[i] = securities.len();
                securities.push(s.clone());
            }
        }
        let index = securities
            .iter()
            .enumerate()
            .map(|(i, s)| (s.security_id.clone(), i))
            .collect();

        let funds = self
            .funds
            .iter()
            .zip(keep_fund)
            .filter(|(_, &keep)| keep)
            .filter_map(|(f, _)| {
                let positions: Vec<Position> = f
                    .positions
                    .iter()
                    .filter(|p| remap[p.security] != usize::MAX)
                    .map(|p| Position {
                        security: remap[p.security],
                        value: p.value,
                    })
                    .collect();
                (!positions.is_empty()).then(|| FundRecord::from_positions(f.fund_id.clone(), positions))
            })
            .collect();

        let mut out = Self::assemble(securities, index, funds);
        out.as_of = self.as_of.clone();
        out
    }

    /// Flattens the snapshot back into raw rows, one per stored position.
    pub fn holding_rows(&self) -> impl Iterator<Item = HoldingRow> + '_ {
        self.funds.iter().flat_map(move |f| {
            f.positions.iter().map(move |p| HoldingRow {
                fund_id: f.fund_id.clone(),
                security_id: self.securities[p.security].security_id.clone(),
                value: p.value,
            })
        })
    }
}

fn rank_order(a: &SecurityRecord, b: &SecurityRecord) -> Ordering {
    b.capitalization
        .total_cmp(&a.capitalization)
        .then_with(|| a.security_id.cmp(&b.security_id))
}
