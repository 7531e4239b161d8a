//! Per-request records, CSV output and run summaries.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::aip::UpdateStrategy;
use crate::error::Result;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Query,
    Update,
}

/// One served request. Column order is the CSV layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub seq: u64,
    pub kind: RecordKind,
    pub arrive_t: f64,
    pub start_t: f64,
    pub done_t: f64,
    pub latency: f64,
    /// Queries only.
    pub staleness: Option<f64>,
    pub touched_nodes: usize,
    #[serde(rename = "M_at_time")]
    pub m_at_time: usize,
}

/// Per-update propagation detail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateRow {
    pub seq: u64,
    pub strategy: UpdateStrategy,
    /// Touched nodes per cached layer, `;`-separated.
    pub touched_per_layer: String,
    pub fallbacks: usize,
    pub wall_micros: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MChange {
    pub t: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub queries: usize,
    pub updates: usize,
    pub latency_mean: f64,
    pub latency_p50: f64,
    pub latency_p99: f64,
    pub update_latency_mean: f64,
    pub update_latency_p99: f64,
    pub staleness_mean: f64,
    pub staleness_max: f64,
    pub staleness_p99: f64,
    pub touched_query_total: u64,
    pub touched_update_total: u64,
    pub touched_query_mean: f64,
    pub touched_update_mean: f64,
    pub m_timeline: Vec<MChange>,
    /// Cached scalars at the end of the run.
    pub cache_floats: usize,
}

/// Nearest-rank percentile of unsorted values; `0` for an empty slice.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

impl Summary {
    pub fn from_records(records: &[MetricsRecord]) -> Self {
        let queries: Vec<&MetricsRecord> = records
            .iter()
            .filter(|r| r.kind == RecordKind::Query)
            .collect();
        let updates: Vec<&MetricsRecord> = records
            .iter()
            .filter(|r| r.kind == RecordKind::Update)
            .collect();
        let lat: Vec<f64> = queries.iter().map(|r| r.latency).collect();
        let ulat: Vec<f64> = updates.iter().map(|r| r.latency).collect();
        let stale: Vec<f64> = queries.iter().map(|r| r.staleness.unwrap_or(0.0)).collect();
        let tq: u64 = queries.iter().map(|r| r.touched_nodes as u64).sum();
        let tu: u64 = updates.iter().map(|r| r.touched_nodes as u64).sum();
        Summary {
            queries: queries.len(),
            updates: updates.len(),
            latency_mean: mean(&lat),
            latency_p50: percentile(&lat, 50.0),
            latency_p99: percentile(&lat, 99.0),
            update_latency_mean: mean(&ulat),
            update_latency_p99: percentile(&ulat, 99.0),
            staleness_mean: mean(&stale),
            staleness_max: stale.iter().copied().fold(0.0, f64::max),
            staleness_p99: percentile(&stale, 99.0),
            touched_query_total: tq,
            touched_update_total: tu,
            touched_query_mean: if queries.is_empty() {
                0.0
            } else {
                tq as f64 / queries.len() as f64
            },
            touched_update_mean: if updates.is_empty() {
                0.0
            } else {
                tu as f64 / updates.len() as f64
            },
            m_timeline: Vec::new(),
            cache_floats: 0,
        }
    }
}

pub fn write_records<W: Write>(w: W, records: &[MetricsRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<MetricsRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_update_rows<W: Write>(w: W, rows: &[UpdateRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(seq: u64, kind: RecordKind, latency: f64, staleness: Option<f64>) -> MetricsRecord {
        MetricsRecord {
            seq,
            kind,
            arrive_t: 0.0,
            start_t: 0.0,
            done_t: latency,
            latency,
            staleness,
            touched_nodes: 3,
            m_at_time: 1,
        }
    }

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 50.0), 50.0);
        assert_eq!(percentile(&v, 99.0), 99.0);
        assert_eq!(percentile(&v, 100.0), 100.0);
        assert_eq!(percentile(&[7.0], 99.0), 7.0);
        assert_eq!(percentile(&[], 99.0), 0.0);
    }

    #[test]
    fn csv_header_and_round_trip() {
        let records = vec![
            rec(1, RecordKind::Update, 0.5, None),
            rec(2, RecordKind::Query, 0.25, Some(0.125)),
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "seq,kind,arrive_t,start_t,done_t,latency,staleness,touched_nodes,M_at_time"
        );
        assert!(text.contains("1,update,0.0,0.0,0.5,0.5,,3,1"));
        assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn summary_splits_kinds() {
        let records = vec![
            rec(1, RecordKind::Update, 2.0, None),
            rec(2, RecordKind::Query, 1.0, Some(0.0)),
            rec(3, RecordKind::Query, 3.0, Some(4.0)),
        ];
        let s = Summary::from_records(&records);
        assert_eq!((s.queries, s.updates), (2, 1));
        assert_eq!(s.latency_mean, 2.0);
        assert_eq!(s.staleness_max, 4.0);
        assert_eq!(s.update_latency_mean, 2.0);
        assert_eq!(s.touched_query_total, 6);
    }
}
