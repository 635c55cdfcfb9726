//! CSV snapshot files and the size/quality filters applied before any fit.
//!
//! Files:
//! - securities: `security_id,capitalization_usd,price_usd,is_us,is_listed`
//! - holdings: `fund_id,security_id,value_usd`
//! - rejects: `line,reason`

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::universe::{build_with_lines, BuildOutcome, HoldingRow, RejectedRow, SecurityRecord, UniverseSnapshot};

pub const SECURITIES_HEADER: [&str; 5] = ["security_id", "capitalization_usd", "price_usd", "is_us", "is_listed"];
pub const HOLDINGS_HEADER: [&str; 3] = ["fund_id", "security_id", "value_usd"];
pub const SECURITIES_FILE: &str = "securities.csv";
pub const HOLDINGS_FILE: &str = "holdings.csv";

fn column_indices(headers: &csv::StringRecord, wanted: &[&str], file: &str) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|col| {
            headers
                .iter()
                .position(|h| h.trim() == *col)
                .ok_or_else(|| Error::MissingHeader {
                    file: file.to_string(),
                    column: col.to_string(),
                })
        })
        .collect()
}

fn parse_bool(field: &str) -> std::result::Result<Option<bool>, ()> {
    match field.trim() {
        "" => Ok(None),
        "true" => Ok(Some(true)),
        "false" => Ok(Some(false)),
        _ => Err(()),
    }
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// Reads a securities table. Malformed rows are returned as rejects.
pub fn read_securities<R: Read>(reader: R) -> Result<(Vec<SecurityRecord>, Vec<RejectedRow>)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let cols = column_indices(rdr.headers()?, &SECURITIES_HEADER, SECURITIES_FILE)?;
    let mut securities = Vec::new();
    let mut rejects = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        let field = |k: usize| record.get(cols[k]).unwrap_or("").trim();
        let mut reject = |reason: &str| {
            rejects.push(RejectedRow {
                line,
                reason: format!("securities: {reason}"),
            })
        };

        let id = field(0);
        if id.is_empty() {
            reject("empty security_id");
            continue;
        }
        let cap = match field(1).parse::<f64>() {
            Ok(c) if c.is_finite() && c > 0.0 => c,
            Ok(_) => {
                reject("non-positive capitalization");
                continue;
            }
            Err(_) => {
                reject("unparsable capitalization_usd");
                continue;
            }
        };
        let price = match field(2) {
            "" => None,
            s => match s.parse::<f64>() {
                Ok(p) if p.is_finite() && p > 0.0 => Some(p),
                Ok(_) => {
                    reject("non-positive price");
                    continue;
                }
                Err(_) => {
                    reject("unparsable price_usd");
                    continue;
                }
            },
        };
        let (Ok(is_us), Ok(is_listed)) = (parse_bool(field(3)), parse_bool(field(4))) else {
            reject("boolean columns must be `true`, `false` or empty");
            continue;
        };
        if !seen.insert(id.to_string()) {
            reject("duplicate security_id");
            continue;
        }
        securities.push(SecurityRecord {
            security_id: id.to_string(),
            capitalization: cap,
            price,
            is_us,
            is_exchange_listed: is_listed,
        });
    }
    Ok((securities, rejects))
}

/// Holdings rows tagged with their file line numbers, plus rejected rows.
pub type HoldingsTable = (Vec<(usize, HoldingRow)>, Vec<RejectedRow>);

/// Reads holdings rows with their file line numbers.
pub fn read_holdings<R: Read>(reader: R) -> Result<HoldingsTable> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let cols = column_indices(rdr.headers()?, &HOLDINGS_HEADER, HOLDINGS_FILE)?;
    let mut rows = Vec::new();
    let mut rejects = Vec::new();

    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        let field = |k: usize| record.get(cols[k]).unwrap_or("").trim();
        let reason = match field(2).parse::<f64>() {
            _ if field(0).is_empty() => Some("empty fund_id"),
            _ if field(1).is_empty() => Some("empty security_id"),
            Ok(v) if v.is_finite() && v > 0.0 => None,
            Ok(_) => Some("non-positive value"),
            Err(_) => Some("unparsable value_usd"),
        };
        match reason {
            Some(reason) => rejects.push(RejectedRow {
                line,
                reason: format!("holdings: {reason}"),
            }),
            None => rows.push((
                line,
                HoldingRow::new(field(0), field(1), field(2).parse::<f64>().unwrap_or_default()),
            )),
        }
    }
    Ok((rows, rejects))
}

/// Builds a snapshot from in-memory CSV sources.
pub fn parse_snapshot<S: Read, H: Read>(securities: S, holdings: H) -> Result<BuildOutcome> {
    let (securities, mut rejects) = read_securities(securities)?;
    let (rows, holding_rejects) = read_holdings(holdings)?;
    rejects.extend(holding_rejects);
    let mut outcome = build_with_lines(securities, rows)?;
    for r in &mut outcome.rejects {
        r.reason = format!("holdings: {}", r.reason);
    }
    rejects.append(&mut outcome.rejects);
    outcome.rejects = rejects;
    Ok(outcome)
}

/// Loads a snapshot from a securities file and a holdings file.
pub fn load_snapshot(securities_path: &Path, holdings_path: &Path) -> Result<BuildOutcome> {
    parse_snapshot(File::open(securities_path)?, File::open(holdings_path)?)
}

/// Loads `securities.csv` and `holdings.csv` from a directory.
pub fn load_snapshot_dir(dir: &Path) -> Result<BuildOutcome> {
    load_snapshot(&dir.join(SECURITIES_FILE), &dir.join(HOLDINGS_FILE))
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_securities<W: Write>(snapshot: &UniverseSnapshot, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(SECURITIES_HEADER)?;
    for s in snapshot.securities() {
        wtr.write_record([
            s.security_id.clone(),
            s.capitalization.to_string(),
            fmt_opt(s.price),
            fmt_opt(s.is_us),
            fmt_opt(s.is_exchange_listed),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_holdings<W: Write>(snapshot: &UniverseSnapshot, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(HOLDINGS_HEADER)?;
    for row in snapshot.holding_rows() {
        wtr.write_record([row.fund_id, row.security_id, row.value.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `securities.csv` and `holdings.csv` into `dir`, creating it if needed.
pub fn save_snapshot_dir(snapshot: &UniverseSnapshot, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_securities(
        snapshot,
        std::io::BufWriter::new(File::create(dir.join(SECURITIES_FILE))?),
    )?;
    write_holdings(
        snapshot,
        std::io::BufWriter::new(File::create(dir.join(HOLDINGS_FILE))?),
    )?;
    Ok(())
}

pub fn write_rejects(rejects: &[RejectedRow], path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["line", "reason"])?;
    for r in rejects {
        wtr.write_record([r.line.to_string(), r.reason.clone()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Keep-test on a security and its investor count.
type SecurityTest<'a> = Box<dyn Fn(&SecurityRecord, usize) -> bool + 'a>;
/// Keep-test on a fund's value and position count.
type FundTest<'a> = Box<dyn Fn(f64, usize) -> bool + 'a>;

/// Size and quality thresholds. Value thresholds are strict (`>`), count
/// and price thresholds inclusive (`>=`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub min_fund_value: f64,
    pub min_capitalization: f64,
    pub min_positions: usize,
    pub min_investors: usize,
    pub min_price: f64,
    pub us_only: bool,
    pub require_listed: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_fund_value: 1e5,
            min_capitalization: 1e5,
            min_positions: 5,
            min_investors: 10,
            min_price: 5.0,
            us_only: true,
            require_listed: true,
        }
    }
}

impl FilterConfig {
    /// A config that removes nothing except empty funds.
    pub fn permissive() -> Self {
        Self {
            min_fund_value: 0.0,
            min_capitalization: 0.0,
            min_positions: 0,
            min_investors: 0,
            min_price: 0.0,
            us_only: false,
            require_listed: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.min_fund_value) && ok(self.min_capitalization) && ok(self.min_price) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "filter thresholds must be finite and >= 0".into(),
            ))
        }
    }

    fn security_stages(&self) -> [(&'static str, SecurityTest<'_>); 4] {
        [
            (
                "capitalization",
                Box::new(move |s, _| s.capitalization > self.min_capitalization),
            ),
            ("country", Box::new(move |s, _| !self.us_only || s.is_us != Some(false))),
            (
                "penny_stock",
                Box::new(move |s, _| {
                    s.price.is_none_or(|p| p >= self.min_price)
                        && (!self.require_listed || s.is_exchange_listed != Some(false))
                }),
            ),
            ("min_investors", Box::new(move |_, m| m >= self.min_investors)),
        ]
    }

    /// Whether a security passes every security filter.
    pub fn keeps_security(&self, security: &SecurityRecord, investors: usize) -> bool {
        self.security_stages().iter().all(|(_, keep)| keep(security, investors))
    }

    /// Whether a fund with value `w` and `n` positions passes the fund filters.
    pub fn keeps_fund(&self, w: f64, n: usize) -> bool {
        n > 0 && w > self.min_fund_value && n >= self.min_positions
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterStage {
    pub stage: String,
    pub funds_before: usize,
    pub funds_after: usize,
    pub securities_before: usize,
    pub securities_after: usize,
}

impl FilterStage {
    pub fn removed_anything(&self) -> bool {
        self.funds_after != self.funds_before || self.securities_after != self.securities_before
    }
}

/// Counts before and after each stage, in application order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FilterReport {
    pub stages: Vec<FilterStage>,
}

impl FilterReport {
    pub fn passes(&self) -> usize {
        self.stages
            .iter()
            .filter_map(|s| s.stage.split(':').next())
            .collect::<std::collections::BTreeSet<_>>()
            .len()
    }

    /// `(funds, securities)` removed across all passes.
    pub fn total_removed(&self) -> (usize, usize) {
        match (self.stages.first(), self.stages.last()) {
            (Some(first), Some(last)) => (
                first.funds_before - last.funds_after,
                first.securities_before - last.securities_after,
            ),
            _ => (0, 0),
        }
    }
}

/// Applies the filters repeatedly until a full pass removes nothing.
///
/// Each pass runs the security stages, then the fund stages, rebuilding
/// aggregates after every stage since removing securities lowers `n_i`
/// and `W_i`, and removing funds lowers `m_α`.
pub fn apply_filters(snapshot: &UniverseSnapshot, config: &FilterConfig) -> Result<(UniverseSnapshot, FilterReport)> {
    config.validate()?;
    let mut current = snapshot.clone();
    let mut report = FilterReport::default();

    for pass in 1.. {
        let mut removed = false;

        for (name, keep) in config.security_stages() {
            let mask: Vec<bool> = current
                .securities()
                .iter()
                .zip(current.investor_counts())
                .map(|(s, &m)| keep(s, m))
                .collect();
            let next = current.restrict(&mask, &vec![true; current.n_funds()]);
            removed |= record(&mut report, pass, name, &current, &next);
            current = next;
        }

        let fund_stages: [(&str, FundTest<'_>); 2] = [
            ("fund_value", Box::new(|w, _| w > config.min_fund_value)),
            ("min_positions", Box::new(|_, n| n >= config.min_positions)),
        ];
        for (name, keep) in fund_stages {
            let mask: Vec<bool> = current
                .funds()
                .iter()
                .map(|f| keep(f.total_value(), f.n_positions()))
                .collect();
            let next = current.restrict(&vec![true; current.n_securities()], &mask);
            removed |= record(&mut report, pass, name, &current, &next);
            current = next;
        }

        if current.n_funds() == 0 || current.n_securities() == 0 {
            return Err(Error::EmptyAfterFiltering { report });
        }
        if !removed {
            break;
        }
    }
    Ok((current, report))
}

fn record(
    report: &mut FilterReport,
    pass: usize,
    name: &str,
    before: &UniverseSnapshot,
    after: &UniverseSnapshot,
) -> bool {
    let stage = FilterStage {
        stage: format!("pass{pass}:{name}"),
        funds_before: before.n_funds(),
        funds_after: after.n_funds(),
        securities_before: before.n_securities(),
        securities_after: after.n_securities(),
    };
    let removed = stage.removed_anything();
    report.stages.push(stage);
    removed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::build_snapshot;

    const SECS: &str = "security_id,capitalization_usd,price_usd,is_us,is_listed\n\
                        A,1000,,,\n\
                        B,2000,10,true,true\n";

    #[test]
    fn small_file_parses() {
        let holdings = "fund_id,security_id,value_usd\nf1,A,10\nf1,B,20\nf2,B,5\n";
        let out = parse_snapshot(SECS.as_bytes(), holdings.as_bytes()).unwrap();
        assert!(out.rejects.is_empty());
        let s = out.snapshot;
        assert_eq!(s.n_funds(), 2);
        assert_eq!(s.fund("f1").unwrap().total_value(), 30.0);
        assert_eq!(s.investor_counts(), &[1, 2]);
        assert_eq!(s.securities()[1].price, Some(10.0));
        assert_eq!(s.securities()[0].is_us, None);
    }

    #[test]
    fn negative_value_is_rejected_with_reason() {
        let holdings = "fund_id,security_id,value_usd\nf1,A,10\nf1,B,-5\nf2,B,abc\n";
        let out = parse_snapshot(SECS.as_bytes(), holdings.as_bytes()).unwrap();
        assert_eq!(out.rejects.len(), 2);
        assert_eq!(out.rejects[0].line, 3);
        assert_eq!(out.rejects[0].reason, "holdings: non-positive value");
        assert_eq!(out.rejects[1].reason, "holdings: unparsable value_usd");
    }

    #[test]
    fn unknown_security_line_numbers_refer_to_file() {
        let holdings = "fund_id,security_id,value_usd\nf1,A,10\nf1,ZZ,5\n";
        let out = parse_snapshot(SECS.as_bytes(), holdings.as_bytes()).unwrap();
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].line, 3);
        assert!(out.rejects[0].reason.starts_with("holdings: unknown security_id"));
    }

    #[test]
    fn missing_header_is_fatal() {
        let holdings = "fund,security_id,value_usd\nf1,A,10\n";
        let err = parse_snapshot(SECS.as_bytes(), holdings.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MissingHeader { ref column, .. } if column == "fund_id"));
    }

    #[test]
    fn bad_security_rows_are_rejected() {
        let secs = "security_id,capitalization_usd,price_usd,is_us,is_listed\n\
                    A,1000,,,\nB,-1,,,\nC,10,,yes,\nA,5,,,\n";
        let (s, rejects) = read_securities(secs.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        let reasons: Vec<_> = rejects.iter().map(|r| r.reason.as_str()).collect();
        assert_eq!(
            reasons,
            [
                "securities: non-positive capitalization",
                "securities: boolean columns must be `true`, `false` or empty",
                "securities: duplicate security_id"
            ]
        );
    }

    fn fixture(n_funds: usize, n_secs: usize, holds: impl Fn(usize, usize) -> bool) -> UniverseSnapshot {
        let secs = (0..n_secs)
            .map(|s| SecurityRecord::new(format!("s{s:02}"), 1e9))
            .collect();
        let rows = (0..n_funds).flat_map(|f| {
            (0..n_secs)
                .filter(|&s| holds(f, s))
                .map(move |s| HoldingRow::new(format!("f{f:02}"), format!("s{s:02}"), 1e6))
                .collect::<Vec<_>>()
        });
        build_snapshot(secs, rows).unwrap().snapshot
    }

    #[test]
    fn under_diversified_fund_is_removed() {
        let snap = fixture(11, 5, |_, _| true);
        // one extra fund holding four securities
        let mut rows: Vec<HoldingRow> = snap.holding_rows().collect();
        for s in 0..4 {
            rows.push(HoldingRow::new("small", format!("s{s:02}"), 1e6));
        }
        let snap = build_snapshot(snap.securities().to_vec(), rows).unwrap().snapshot;
        let (out, _) = apply_filters(&snap, &FilterConfig::default()).unwrap();
        assert!(out.fund("small").is_none());
        assert_eq!(out.n_funds(), 11);
    }

    #[test]
    fn all_passing_universe_is_unchanged() {
        let snap = fixture(12, 6, |_, _| true);
        let (out, report) = apply_filters(&snap, &FilterConfig::default()).unwrap();
        assert_eq!(out, snap);
        assert_eq!(report.total_removed(), (0, 0));
        assert_eq!(report.passes(), 1);
        assert!(report.stages.iter().all(|s| !s.removed_anything()));
    }

    #[test]
    fn penny_and_foreign_securities_are_dropped() {
        let mut secs: Vec<SecurityRecord> = (0..8).map(|s| SecurityRecord::new(format!("s{s}"), 1e9)).collect();
        secs[0].price = Some(4.99);
        secs[1].is_us = Some(false);
        secs[2].is_exchange_listed = Some(false);
        secs[3].price = Some(5.0);
        let rows = (0..10).flat_map(|f| (0..8).map(move |s| HoldingRow::new(format!("f{f}"), format!("s{s}"), 1e6)));
        let snap = build_snapshot(secs, rows).unwrap().snapshot;
        let (out, _) = apply_filters(&snap, &FilterConfig::default()).unwrap();
        let ids: Vec<_> = out.securities().iter().map(|s| s.security_id.as_str()).collect();
        assert_eq!(ids, ["s3", "s4", "s5", "s6", "s7"]);

        let relaxed = FilterConfig {
            us_only: false,
            require_listed: false,
            ..FilterConfig::default()
        };
        let (out, _) = apply_filters(&snap, &relaxed).unwrap();
        assert_eq!(out.n_securities(), 7);
    }

    #[test]
    fn empty_result_carries_report() {
        let snap = fixture(3, 3, |_, _| true);
        match apply_filters(&snap, &FilterConfig::default()) {
            Err(Error::EmptyAfterFiltering { report }) => assert!(!report.stages.is_empty()),
            other => panic!("expected empty-after-filtering, got {other:?}"),
        }
    }

    #[test]
    fn report_counts_never_increase() {
        let snap = fixture(30, 20, |f, s| (f * 7 + s * 3) % 5 != 0 && f % 4 != 0 || s < 3);
        let (_, report) = apply_filters(&snap, &FilterConfig::default()).unwrap();
        for w in report.stages.windows(2) {
            assert_eq!(w[0].funds_after, w[1].funds_before);
            assert_eq!(w[0].securities_after, w[1].securities_before);
        }
        for s in &report.stages {
            assert!(s.funds_after <= s.funds_before);
            assert!(s.securities_after <= s.securities_before);
        }
    }
}
