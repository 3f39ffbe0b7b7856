//! CSV and JSON emission.

use std::io::Write;

use serde::Serialize;

use super::config::{Axis, RawConfig, RunConfig};
use super::sweep::Row;
use crate::error::Result;

/// Seventeen significant digits: enough for any `f64` to round-trip.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn csv_header(k: usize) -> String {
    let mut cols = vec![
        "sweep_value".to_string(),
        "tau_db".into(),
        "engine".into(),
        "pc_total".into(),
    ];
    cols.extend((1..=k).map(|i| format!("pc_tier_{i}")));
    cols.extend((1..=k).map(|i| format!("assoc_tier_{i}")));
    cols.push("mc_ci_halfwidth".into());
    cols.push("wall_ms".into());
    cols.join(",")
}

pub fn write_csv<W: Write>(mut w: W, k: usize, rows: &[Row]) -> Result<()> {
    writeln!(w, "{}", csv_header(k))?;
    for r in rows {
        let mut cells = vec![
            num(r.sweep_value),
            num(r.tau_db),
            r.engine.label().to_string(),
            num(r.pc_total),
        ];
        cells.extend(r.pc_tier.iter().copied().map(num));
        cells.extend(r.assoc_tier.iter().copied().map(num));
        cells.push(opt(r.mc_ci_halfwidth));
        cells.push(opt(r.wall_ms));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    package: &'static str,
    version: &'static str,
    axis: Axis,
    tiers: usize,
    parallel_feature: bool,
    failed_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_wall_ms: Option<f64>,
    columns: Vec<&'a str>,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    metadata: Metadata<'a>,
    config: &'a RawConfig,
    rows: &'a [Row],
}

/// JSON mirror of the CSV with the parsed config echoed back.
/// Non-finite numbers appear as `null`.
pub fn write_json<W: Write>(
    w: W,
    cfg: &RunConfig,
    rows: &[Row],
    total_wall_ms: Option<f64>,
) -> Result<()> {
    let header = csv_header(cfg.base.len());
    let report = Report {
        metadata: Metadata {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            axis: cfg.axis,
            tiers: cfg.base.len(),
            parallel_feature: cfg!(feature = "parallel"),
            failed_rows: rows.iter().filter(|r| r.failed()).count(),
            total_wall_ms: total_wall_ms.filter(|_| cfg.output.timing),
            columns: header.split(',').collect(),
        },
        config: &cfg.raw,
        rows,
    };
    serde_json::to_writer_pretty(w, &report).map_err(|e| crate::Error::Io(e.to_string()))
}
