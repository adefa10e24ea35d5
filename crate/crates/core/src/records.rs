//! Input records.
//!
//! Two CSV layouts are accepted:
//!
//! * single column, one sample per line (an optional non-numeric header line
//!   is skipped); the record id is the file stem;
//! * long format with the header `record_id,sample_index,value`, holding any
//!   number of records. Sample indices of each record must cover `0..n`.
//!
//! The sampling rate is not stored in either layout and is supplied by the
//! caller.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub const LONG_HEADER: &str = "record_id,sample_index,value";

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub series: TimeSeries,
}

/// A record that could not be turned into a [`TimeSeries`].
#[derive(Debug)]
pub struct RejectedRecord {
    pub id: String,
    pub error: Error,
}

/// Everything read from one file: good records plus per-record failures.
#[derive(Debug, Default)]
pub struct RecordBatch {
    pub records: Vec<Record>,
    pub rejected: Vec<RejectedRecord>,
}

#[derive(Debug, Deserialize)]
struct LongRow {
    record_id: String,
    sample_index: usize,
    value: f64,
}

/// Reads all records of a CSV file.
///
/// File-level problems (I/O, malformed rows) are errors; a record whose
/// samples are non-finite or whose indices have gaps is reported in
/// [`RecordBatch::rejected`] instead.
pub fn read_records(path: &Path, rate: f64) -> Result<RecordBatch> {
    let text = fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("").trim();
    if first == LONG_HEADER {
        parse_long(path, &text, rate)
    } else {
        parse_single(path, &text, rate)
    }
}

fn parse_single(path: &Path, text: &str, rate: f64) -> Result<RecordBatch> {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => samples.push(v),
            Err(_) if lineno == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: lineno + 1,
                    message: format!("{line:?}: {e}"),
                })
            }
        }
    }
    let mut batch = RecordBatch::default();
    match TimeSeries::new(samples, rate) {
        Ok(series) => batch.records.push(Record { id, series }),
        Err(error) => batch.rejected.push(RejectedRecord { id, error }),
    }
    Ok(batch)
}

fn parse_long(path: &Path, text: &str, rate: f64) -> Result<RecordBatch> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut grouped: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (k, row) in reader.deserialize::<LongRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: k + 2,
            message: e.to_string(),
        })?;
        grouped
            .entry(row.record_id)
            .or_default()
            .push((row.sample_index, row.value));
    }

    let mut batch = RecordBatch::default();
    for (id, mut rows) in grouped {
        rows.sort_by_key(|r| r.0);
        if let Some(pos) = rows.iter().enumerate().position(|(i, r)| r.0 != i) {
            batch.rejected.push(RejectedRecord {
                error: Error::InvalidParameter(format!(
                    "record {id}: sample indices not contiguous at position {pos}"
                )),
                id,
            });
            continue;
        }
        match TimeSeries::new(rows.into_iter().map(|r| r.1).collect(), rate) {
            Ok(series) => batch.records.push(Record { id, series }),
            Err(error) => batch.rejected.push(RejectedRecord { id, error }),
        }
    }
    Ok(batch)
}

/// Writes records in the long layout.
pub fn write_records(path: &Path, records: &[Record]) -> Result<()> {
    let mut out = String::from(LONG_HEADER);
    out.push('\n');
    for r in records {
        for (i, v) in r.series.samples().iter().enumerate() {
            out.push_str(&format!("{},{i},{v}\n", r.id));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Per-record labels, keyed by record id.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct RecordLabels {
    pub record_id: String,
    #[serde(default)]
    pub subject_id: Option<String>,
    #[serde(default)]
    pub age: Option<f64>,
    #[serde(default)]
    pub sbp: Option<f64>,
    #[serde(default)]
    pub dbp: Option<f64>,
}

/// Reads a labels CSV with header `record_id[,subject_id][,age][,sbp][,dbp]`.
/// Empty cells are treated as missing.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, RecordLabels>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = BTreeMap::new();
    for row in reader.deserialize::<RecordLabels>() {
        let mut row = row?;
        if row.subject_id.as_deref() == Some("") {
            row.subject_id = None;
        }
        out.insert(row.record_id.clone(), row);
    }
    Ok(out)
}

/// Record ids end up in file names, so they are restricted to a
/// conservative character set.
pub fn is_safe_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}
