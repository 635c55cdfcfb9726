//! Builds a small ownership snapshot by hand and prints its aggregates:
//! fund values `W_i`, diversification `n_i`, investor counts `m_α` and
//! scaled capitalization ranks.

use crowd_scaling::universe::{build_snapshot, HoldingRow, SecurityRecord};

fn main() -> crowd_scaling::Result<()> {
    let securities = vec![
        SecurityRecord::new("AAA", 5.0e11),
        SecurityRecord::new("BBB", 2.0e11),
        SecurityRecord::new("CCC", 4.0e10),
        SecurityRecord::new("DDD", 9.0e9),
    ];
    let holdings = vec![
        HoldingRow::new("growth", "AAA", 3.0e6),
        HoldingRow::new("growth", "BBB", 1.0e6),
        HoldingRow::new("value", "BBB", 2.5e6),
        HoldingRow::new("value", "CCC", 2.5e6),
        HoldingRow::new("value", "DDD", 2.5e6),
        // repeated rows are summed
        HoldingRow::new("value", "DDD", 0.5e6),
        // unknown securities are rejected, not silently dropped
        HoldingRow::new("value", "ZZZ", 1.0e6),
    ];
    let outcome = build_snapshot(securities, holdings)?;
    for reject in &outcome.rejects {
        println!("rejected row {}: {}", reject.line, reject.reason);
    }

    let snapshot = outcome.snapshot;
    for fund in snapshot.funds() {
        println!(
            "fund {:<7} n = {}  W = {:.3e}",
            fund.fund_id(),
            fund.n_positions(),
            fund.total_value()
        );
    }
    let ranks = snapshot.scaled_ranks();
    for ((security, m), rho) in snapshot.securities().iter().zip(snapshot.investor_counts()).zip(&ranks) {
        println!(
            "security {}  C = {:.1e}  m = {m}  scaled rank = {rho:.2}",
            security.security_id, security.capitalization
        );
    }
    Ok(())
}
