//! Side-by-side comparison of recorded runs.

use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use crate::error::Result;
use crate::harness::metrics::{read_records, Summary};

/// Summaries of per-request CSV files, keyed by file stem.
pub fn summarize_files<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<(String, Summary)>> {
    paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let name = p.file_stem().map_or_else(
                || p.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            );
            let records = read_records(File::open(p)?)?;
            Ok((name, Summary::from_records(&records)))
        })
        .collect()
}

/// Markdown table of latency, staleness and touched-node columns.
pub fn comparison_table(rows: &[(String, Summary)]) -> String {
    let mut out = String::new();
    out.push_str(
        "| run | queries | updates | lat mean | lat p50 | lat p99 | stale mean | stale max | stale p99 | touched/q | touched/u |\n",
    );
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for (name, s) in rows {
        let _ = writeln!(
            out,
            "| {name} | {} | {} | {:.3e} | {:.3e} | {:.3e} | {:.3e} | {:.3e} | {:.3e} | {:.1} | {:.1} |",
            s.queries,
            s.updates,
            s.latency_mean,
            s.latency_p50,
            s.latency_p99,
            s.staleness_mean,
            s.staleness_max,
            s.staleness_p99,
            s.touched_query_mean,
            s.touched_update_mean,
        );
    }
    out
}

pub fn report<P: AsRef<Path>>(paths: &[P]) -> Result<String> {
    Ok(comparison_table(&summarize_files(paths)?))
}
