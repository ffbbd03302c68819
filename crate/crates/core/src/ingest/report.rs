//! Report output: leaderboard tables, machine-readable records, and
//! plot-ready disparity/relevance data.
//!
//! Tables round to three decimals for presentation; the machine-readable
//! line-delimited JSON keeps full precision.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::ParseError;
use crate::metrics::{LeaderboardRow, QueryMetrics, RunMetrics};

/// The available report renderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// TSV table: `run`, `EE` ascending, three decimals.
    Table,
    /// Line-delimited JSON, one full-precision record per run.
    MachineReadable,
    /// TSV rows of `run_id`, `disparity`, `relevance` for plotting.
    PlotData,
}

/// Renders leaderboard rows in the requested format. Rows are written in the
/// order given; use [`crate::metrics::leaderboard`] to sort first.
pub fn write_report<W: Write>(
    rows: &[LeaderboardRow],
    format: ReportFormat,
    writer: W,
) -> Result<(), ParseError> {
    match format {
        ReportFormat::Table => write_leaderboard_table(rows, writer),
        ReportFormat::MachineReadable => write_leaderboard_records(rows, writer),
        ReportFormat::PlotData => write_plot_data(rows, writer),
    }
}

/// TSV leaderboard: header then one row per run, distance to three decimals.
pub fn write_leaderboard_table<W: Write>(
    rows: &[LeaderboardRow],
    mut writer: W,
) -> Result<(), ParseError> {
    writeln!(writer, "run\tEE")?;
    for row in rows {
        writeln!(writer, "{}\t{:.3}", row.run_id, row.mean_ee)?;
    }
    Ok(())
}

/// Full-precision per-run records, one JSON object per line.
pub fn write_leaderboard_records<W: Write>(
    rows: &[LeaderboardRow],
    mut writer: W,
) -> Result<(), ParseError> {
    for row in rows {
        serde_json::to_writer(&mut writer, row).map_err(|e| ParseError::Io(e.into()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads records written by [`write_leaderboard_records`].
pub fn read_leaderboard_records<R: BufRead>(reader: R) -> Result<Vec<LeaderboardRow>, ParseError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        rows.push(
            serde_json::from_str(&text).map_err(|source| ParseError::Json {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(rows)
}

/// One row per run on the disparity/relevance plane, three decimals.
pub fn write_plot_data<W: Write>(rows: &[LeaderboardRow], mut writer: W) -> Result<(), ParseError> {
    writeln!(writer, "run_id\tdisparity\trelevance")?;
    for row in rows {
        writeln!(
            writer,
            "{}\t{:.3}\t{:.3}",
            row.run_id, row.mean_disparity, row.mean_relevance
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct QueryDetailRecord<'a> {
    qid: &'a str,
    ee: f64,
    disparity: f64,
    relevance: f64,
    system_group_exposure: std::collections::BTreeMap<&'a str, f64>,
    target_group_exposure: std::collections::BTreeMap<&'a str, f64>,
    unassigned_author_exposure: f64,
}

fn detail_record(qm: &QueryMetrics) -> QueryDetailRecord<'_> {
    QueryDetailRecord {
        qid: qm.qid.as_str(),
        ee: qm.ee,
        disparity: qm.disparity,
        relevance: qm.relevance,
        system_group_exposure: qm
            .system_group_exposure
            .iter()
            .map(|(g, v)| (g.as_str(), v))
            .collect(),
        target_group_exposure: qm
            .target_group_exposure
            .iter()
            .map(|(g, v)| (g.as_str(), v))
            .collect(),
        unassigned_author_exposure: qm.unassigned_author_exposure,
    }
}

/// Per-query detail for one run: full precision, one JSON object per line,
/// ordered by qid.
pub fn write_query_details<W: Write>(
    run_metrics: &RunMetrics,
    mut writer: W,
) -> Result<(), ParseError> {
    for qm in &run_metrics.per_query {
        serde_json::to_writer(&mut writer, &detail_record(qm))
            .map_err(|e| ParseError::Io(e.into()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
