//! Scaled Shannon entropy of portfolio weights.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::universe::{FundRecord, UniverseSnapshot};

/// `-Σ p log2 p / log2 n` over the non-zero entries of `values`, with the
/// weights `p` obtained by normalising `values`. A single position counts as
/// equally weighted and scores 1.
pub fn scaled_entropy_of(values: &[f64]) -> f64 {
    let held: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    let n = held.len();
    if n <= 1 {
        return 1.0;
    }
    let total: f64 = held.iter().sum();
    let h: f64 = held
        .iter()
        .map(|v| {
            let p = v / total;
            -p * p.log2()
        })
        .sum();
    (h / (n as f64).log2()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub fund_id: String,
    pub n_i: usize,
    pub scaled_entropy: f64,
}

pub fn scaled_entropy(fund: &FundRecord) -> EntropyRecord {
    let values: Vec<f64> = fund.positions().iter().map(|p| p.value).collect();
    EntropyRecord {
        fund_id: fund.fund_id().to_string(),
        n_i: fund.n_positions(),
        scaled_entropy: scaled_entropy_of(&values),
    }
}

pub fn entropy_table(snapshot: &UniverseSnapshot) -> Vec<EntropyRecord> {
    snapshot.funds().iter().map(scaled_entropy).collect()
}

/// Mean scaled entropy of initially equal-weight portfolios after price
/// evolution, as a function of the number of positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmcPoint {
    pub n: usize,
    pub mean_entropy: f64,
    pub stderr: f64,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmcCurve {
    pub points: Vec<SmcPoint>,
}

impl SmcCurve {
    /// A curve equal to 1 everywhere (no price fluctuation).
    pub fn flat() -> Self {
        Self {
            points: vec![SmcPoint {
                n: 1,
                mean_entropy: 1.0,
                stderr: 0.0,
                replicas: 1,
            }],
        }
    }

    /// Value at `n`, interpolated linearly in `log n` and clamped at the ends.
    pub fn at(&self, n: usize) -> f64 {
        let pts = &self.points;
        let x = (n.max(1) as f64).ln();
        let i = pts.partition_point(|p| p.n < n);
        if i == 0 {
            return pts[0].mean_entropy;
        }
        if i == pts.len() {
            return pts[pts.len() - 1].mean_entropy;
        }
        let (a, b) = (&pts[i - 1], &pts[i]);
        let (xa, xb) = ((a.n as f64).ln(), (b.n as f64).ln());
        let t = if xb > xa { (x - xa) / (xb - xa) } else { 0.0 };
        a.mean_entropy + t * (b.mean_entropy - a.mean_entropy)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> crate::Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["n", "mean_entropy", "stderr", "replicas"])?;
        for p in &self.points {
            wtr.write_record([
                p.n.to_string(),
                p.mean_entropy.to_string(),
                p.stderr.to_string(),
                p.replicas.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> crate::Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut points: Vec<SmcPoint> = rdr.deserialize().collect::<Result<_, _>>()?;
        points.sort_by_key(|p| p.n);
        if points.is_empty() {
            return Err(crate::Error::EmptyInput("S_MC curve"));
        }
        Ok(Self { points })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedEntropyRecord {
    pub fund_id: String,
    pub n_i: usize,
    pub n_restricted: usize,
    /// Scaled entropy of the renormalised weights on the common positions.
    pub raw_entropy: f64,
    /// `raw_entropy · S_MC(n_i) / S_MC(n_restricted)`.
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RestrictedEntropyReport {
    pub records: Vec<RestrictedEntropyRecord>,
    pub skipped: Vec<(String, String)>,
}

/// Entropy of each fund's current weights restricted to the positions it
/// already held in the previous snapshot, rescaled by the price-fluctuation
/// curve so that funds of different sizes are comparable.
pub fn restricted_entropy(
    previous: &UniverseSnapshot,
    current: &UniverseSnapshot,
    smc: &SmcCurve,
) -> RestrictedEntropyReport {
    let previous_funds: HashMap<&str, &FundRecord> = previous.funds().iter().map(|f| (f.fund_id(), f)).collect();
    let mut report = RestrictedEntropyReport::default();

    for fund in current.funds() {
        let Some(prev) = previous_funds.get(fund.fund_id()) else {
            report
                .skipped
                .push((fund.fund_id().to_string(), "absent from previous snapshot".into()));
            continue;
        };
        let common: Vec<f64> = fund
            .positions()
            .iter()
            .filter(|p| {
                let id = &current.securities()[p.security].security_id;
                previous.security_index(id).is_some_and(|j| prev.value_of(j).is_some())
            })
            .map(|p| p.value)
            .collect();
        if common.len() < 2 {
            report
                .skipped
                .push((fund.fund_id().to_string(), format!("{} common positions", common.len())));
            continue;
        }
        let raw = scaled_entropy_of(&common);
        let n_i = fund.n_positions();
        report.records.push(RestrictedEntropyRecord {
            fund_id: fund.fund_id().to_string(),
            n_i,
            n_restricted: common.len(),
            raw_entropy: raw,
            value: raw * smc.at(n_i) / smc.at(common.len()),
        });
    }
    report
}
