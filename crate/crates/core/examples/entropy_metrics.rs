//! Scaled entropy of portfolio weights, the largest held fraction `f_max`,
//! and the entropy of weights restricted to positions held in both of two
//! snapshots.

use crowd_scaling::metrics::{fmax, restricted_entropy, scaled_entropy, scaled_entropy_of, SmcCurve};
use crowd_scaling::universe::{build_snapshot, HoldingRow, SecurityRecord};

fn main() -> crowd_scaling::Result<()> {
    println!("equal weights:  S = {:.4}", scaled_entropy_of(&[1.0; 8]));
    println!("3:1 split:      S = {:.4}", scaled_entropy_of(&[3.0, 1.0]));
    println!("one dominant:   S = {:.4}", scaled_entropy_of(&[97.0, 1.0, 1.0, 1.0]));

    let securities: Vec<SecurityRecord> = (0..6)
        .map(|i| SecurityRecord::new(format!("S{i}"), 1e9 * (i + 1) as f64))
        .collect();
    let q1 = build_snapshot(
        securities.clone(),
        (0..4).map(|i| HoldingRow::new("fund", format!("S{i}"), 1e6)),
    )?
    .snapshot;
    let q2 = build_snapshot(
        securities,
        (2..6).map(|i| HoldingRow::new("fund", format!("S{i}"), 1e6 * i as f64)),
    )?
    .snapshot;

    let fund = &q2.funds()[0];
    println!(
        "second snapshot: S = {:.4}, f_max = {:.2e}",
        scaled_entropy(fund).scaled_entropy,
        fmax(fund, &q2).f_max
    );
    for record in restricted_entropy(&q1, &q2, &SmcCurve::flat()).records {
        println!(
            "restricted to {} of {} positions: S = {:.4}",
            record.n_restricted, record.n_i, record.value
        );
    }
    Ok(())
}
