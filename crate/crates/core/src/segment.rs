//! Cutting records into fixed-length segments.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::peaks::PeakList;
use crate::records::Record;
use crate::series::TimeSeries;

pub const PULSE_LEN: usize = 50;
pub const WINDOW_LEN: usize = 224;
pub const PLATEAU_RUN: usize = 5;
pub const PLATEAU_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Truncated,
    ZeroPadded,
    Exact,
    Window(usize),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Truncated => f.write_str("truncated"),
            Provenance::ZeroPadded => f.write_str("zero_padded"),
            Provenance::Exact => f.write_str("exact"),
            Provenance::Window(k) => write!(f, "window({k})"),
        }
    }
}

/// A fixed-length slice of a record.
///
/// `source_range` is the span of the parent record the samples came from;
/// for a zero-padded pulse it is shorter than `target_len`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSegment {
    pub samples: Vec<f64>,
    pub target_len: usize,
    pub provenance: Provenance,
    pub source_record: String,
    pub source_range: Range<usize>,
}

impl PulseSegment {
    pub fn to_series(&self, rate: f64) -> Result<TimeSeries> {
        TimeSeries::new(self.samples.clone(), rate)
    }
}

/// One segment per peak-to-peak interval `[peak_k, peak_{k+1})`, brought to
/// `target_len` samples by keeping the head or zero-padding the tail.
///
/// Fewer than two peaks give no segments.
pub fn segment_pulses(
    record: &Record,
    peaks: &PeakList,
    target_len: usize,
) -> Result<Vec<PulseSegment>> {
    if target_len == 0 {
        return Err(Error::InvalidParameter(
            "target_len must be at least 1".into(),
        ));
    }
    let y = record.series.samples();
    if let Some(&last) = peaks.indices.last() {
        if last >= y.len() {
            return Err(Error::InvalidParameter(format!(
                "peak index {last} outside record of {} samples",
                y.len()
            )));
        }
    }
    Ok(peaks
        .indices
        .windows(2)
        .map(|w| {
            let (start, end) = (w[0], w[1]);
            let len = end - start;
            let (take, provenance) = match len.cmp(&target_len) {
                std::cmp::Ordering::Greater => (target_len, Provenance::Truncated),
                std::cmp::Ordering::Less => (len, Provenance::ZeroPadded),
                std::cmp::Ordering::Equal => (len, Provenance::Exact),
            };
            let mut samples = Vec::with_capacity(target_len);
            samples.extend_from_slice(&y[start..start + take]);
            samples.resize(target_len, 0.0);
            PulseSegment {
                samples,
                target_len,
                provenance,
                source_record: record.id.clone(),
                source_range: start..start + take,
            }
        })
        .collect())
}

/// Contiguous windows starting every `stride` samples; a trailing partial
/// window is dropped.
pub fn segment_windows(
    record: &Record,
    window_len: usize,
    stride: usize,
) -> Result<Vec<PulseSegment>> {
    if window_len == 0 || stride == 0 {
        return Err(Error::InvalidParameter(
            "window_len and stride must be at least 1".into(),
        ));
    }
    let y = record.series.samples();
    if y.len() < window_len {
        return Ok(Vec::new());
    }
    Ok((0..=y.len() - window_len)
        .step_by(stride)
        .enumerate()
        .map(|(k, start)| PulseSegment {
            samples: y[start..start + window_len].to_vec(),
            target_len: window_len,
            provenance: Provenance::Window(k),
            source_record: record.id.clone(),
            source_range: start..start + window_len,
        })
        .collect())
}

/// True when some run of `run_len` consecutive samples spans no more than
/// `rel_tol * (max - min)` of the whole segment. A constant segment is a
/// plateau by definition.
pub fn has_plateau(samples: &[f64], run_len: usize, rel_tol: f64) -> Result<bool> {
    if run_len < 2 {
        return Err(Error::InvalidParameter("run_len must be at least 2".into()));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if samples.is_empty() {
        return Ok(false);
    }
    if hi == lo {
        return Ok(true);
    }
    let tol = rel_tol * (hi - lo);
    Ok(samples.windows(run_len).any(|run| {
        let (a, b) = run
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        b - a <= tol
    }))
}
