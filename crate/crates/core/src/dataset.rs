//! Batch pipeline: records -> segments -> channel-stack tensors + manifest.
//!
//! All output names and split labels are fixed before any tensor is built,
//! so the result does not depend on how many workers run.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::segment_to_image;
use crate::manifest::{AgeGroup, ManifestRow, RecordManifest, Split};
use crate::metrics::extract_sbp_dbp;
use crate::peaks::{detect_peaks_with, PeakParams};
use crate::records::{is_safe_id, read_labels, read_records, Record, RecordLabels};
use crate::segment::{
    has_plateau, segment_pulses, segment_windows, Provenance, PulseSegment, PLATEAU_REL_TOL,
    PLATEAU_RUN, PULSE_LEN, WINDOW_LEN,
};
use crate::tensor::encode;

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const TENSOR_DIR: &str = "tensors";
pub const PREVIEW_DIR: &str = "previews";

/// Train / validation / test proportions used by default.
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.662, 0.169, 0.169];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentMode {
    /// Peak-to-peak pulses, padded or truncated to `target_len`.
    Pulse { target_len: usize },
    /// Fixed windows; windows containing a plateau are dropped.
    Window { window_len: usize, stride: usize },
}

impl SegmentMode {
    pub fn pulse() -> Self {
        SegmentMode::Pulse {
            target_len: PULSE_LEN,
        }
    }

    pub fn window() -> Self {
        SegmentMode::Window {
            window_len: WINDOW_LEN,
            stride: WINDOW_LEN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitBy {
    #[default]
    Segment,
    /// Keeps all segments of a subject in one split. Split sizes then only
    /// approximate the requested fractions.
    Subject,
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub inputs: Vec<PathBuf>,
    pub rate: f64,
    pub mode: SegmentMode,
    pub fractions: [f64; 3],
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    pub upscale: Option<usize>,
    pub png: bool,
    pub split_by: SplitBy,
    /// Optional CSV of per-record labels.
    pub labels: Option<PathBuf>,
    /// Optional blood-pressure records aligned sample-for-sample with the
    /// inputs; each segment's SBP/DBP then comes from its span of the wave.
    pub bp_inputs: Vec<PathBuf>,
}

impl DatasetConfig {
    pub fn new(inputs: Vec<PathBuf>, rate: f64, out_dir: PathBuf) -> Self {
        Self {
            inputs,
            rate,
            mode: SegmentMode::pulse(),
            fractions: DEFAULT_FRACTIONS,
            seed: 0,
            out_dir,
            workers: 0,
            upscale: None,
            png: false,
            split_by: SplitBy::Segment,
            labels: None,
            bp_inputs: Vec::new(),
        }
    }
}

#[derive(Debug, Default)]
pub struct DatasetSummary {
    pub manifest: RecordManifest,
    pub records_used: usize,
    pub files_skipped: usize,
    pub records_skipped: usize,
    pub plateau_rejected: usize,
    pub warnings: Vec<String>,
}

impl DatasetSummary {
    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

pub fn validate_fractions(fractions: &[f64; 3]) -> Result<()> {
    if fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(Error::InvalidParameter(
            "split fractions must be non-negative".into(),
        ));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "split fractions must sum to 1, got {sum}"
        )));
    }
    Ok(())
}

/// Row counts per split: train and val are rounded, test takes the rest,
/// so every count is within one row of `fraction * n`.
pub fn split_sizes(n: usize, fractions: &[f64; 3]) -> [usize; 3] {
    let train = ((fractions[0] * n as f64).round() as usize).min(n);
    let val = ((fractions[1] * n as f64).round() as usize).min(n - train);
    [train, val, n - train - val]
}

/// Seeded shuffle of `0..n`, cut into train/val/test by [`split_sizes`].
pub fn assign_splits(n: usize, fractions: &[f64; 3], seed: u64) -> Vec<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let [train, val, _] = split_sizes(n, fractions);
    let mut out = vec![Split::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = if rank < train {
            Split::Train
        } else if rank < train + val {
            Split::Val
        } else {
            Split::Test
        };
    }
    out
}

/// Subject-level variant: subjects are shuffled and filled into train, then
/// val, then test until each split reaches its target row count.
pub fn assign_subject_splits(subjects: &[&str], fractions: &[f64; 3], seed: u64) -> Vec<Split> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in subjects {
        *counts.entry(s).or_default() += 1;
    }
    let mut order: Vec<&str> = counts.keys().copied().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let [train, val, _] = split_sizes(subjects.len(), fractions);
    let bounds = [train, train + val];
    let mut filled = 0;
    let mut stage = 0;
    let mut assigned: BTreeMap<&str, Split> = BTreeMap::new();
    for s in order {
        while stage < 2 && filled >= bounds[stage] {
            stage += 1;
        }
        assigned.insert(s, Split::ALL[stage]);
        filled += counts[s];
    }
    subjects.iter().map(|s| assigned[s]).collect()
}

struct Planned {
    segment: PulseSegment,
    row: ManifestRow,
}

/// Segments of one record in source order, each paired with its index in
/// the manifest (the window position in window mode, the pulse ordinal in
/// pulse mode), plus the number of windows dropped for containing a plateau.
pub fn segment_record(
    record: &Record,
    mode: SegmentMode,
) -> Result<(Vec<(usize, PulseSegment)>, usize)> {
    match mode {
        SegmentMode::Pulse { target_len } => {
            let peaks = detect_peaks_with(&record.series, PeakParams::for_record(&record.series))?;
            let segments = segment_pulses(record, &peaks, target_len)?;
            Ok((segments.into_iter().enumerate().collect(), 0))
        }
        SegmentMode::Window { window_len, stride } => {
            let mut out = Vec::new();
            let mut rejected = 0;
            for seg in segment_windows(record, window_len, stride)? {
                if has_plateau(&seg.samples, PLATEAU_RUN, PLATEAU_REL_TOL)? {
                    rejected += 1;
                } else if let Provenance::Window(k) = seg.provenance {
                    out.push((k, seg));
                }
            }
            Ok((out, rejected))
        }
    }
}

fn load_all(
    paths: &[PathBuf],
    rate: f64,
    summary: &mut DatasetSummary,
) -> BTreeMap<String, Record> {
    let mut paths = paths.to_vec();
    paths.sort();
    paths.dedup();
    let mut out = BTreeMap::new();
    for path in &paths {
        let batch = match read_records(path, rate) {
            Ok(b) => b,
            Err(e) => {
                summary.files_skipped += 1;
                summary.warn(format!("skipping {}: {e}", path.display()));
                continue;
            }
        };
        for r in batch.rejected {
            summary.records_skipped += 1;
            summary.warn(format!(
                "skipping record {} in {}: {}",
                r.id,
                path.display(),
                r.error
            ));
        }
        for rec in batch.records {
            if !is_safe_id(&rec.id) {
                summary.records_skipped += 1;
                summary.warn(format!(
                    "skipping record {:?}: id not usable as a file name",
                    rec.id
                ));
            } else if out.contains_key(&rec.id) {
                summary.records_skipped += 1;
                summary.warn(format!(
                    "skipping duplicate record {} in {}",
                    rec.id,
                    path.display()
                ));
            } else {
                out.insert(rec.id.clone(), rec);
            }
        }
    }
    out
}

pub fn build_dataset(config: &DatasetConfig) -> Result<DatasetSummary> {
    validate_fractions(&config.fractions)?;
    if !(config.rate.is_finite() && config.rate > 0.0) {
        return Err(Error::InvalidRate(config.rate));
    }
    let mut summary = DatasetSummary::default();

    let labels: BTreeMap<String, RecordLabels> = match &config.labels {
        Some(p) => read_labels(p)?,
        None => BTreeMap::new(),
    };
    let records = load_all(&config.inputs, config.rate, &mut summary);
    let bp_records = if config.bp_inputs.is_empty() {
        BTreeMap::new()
    } else {
        let mut bp_summary = DatasetSummary::default();
        let bp = load_all(&config.bp_inputs, config.rate, &mut bp_summary);
        for w in bp_summary.warnings {
            summary.warn(format!("blood pressure: {w}"));
        }
        bp
    };

    // Records are visited in id order and segments in source order, which
    // is the (record_id, segment_index) order the split shuffle starts from.
    let mut plan: Vec<Planned> = Vec::new();
    for (id, record) in &records {
        let segments = match segment_record(record, config.mode) {
            Ok((s, rejected)) => {
                summary.plateau_rejected += rejected;
                s
            }
            Err(e) => {
                summary.records_skipped += 1;
                summary.warn(format!("skipping record {id}: {e}"));
                continue;
            }
        };
        if !segments.is_empty() {
            summary.records_used += 1;
        }
        let label = labels.get(id);
        for (index, segment) in segments {
            let age = label.and_then(|l| l.age);
            let (mut sbp, mut dbp) = (label.and_then(|l| l.sbp), label.and_then(|l| l.dbp));
            if let Some(bp) = bp_records.get(id) {
                let r = &segment.source_range;
                if let Some(wave) = bp.series.samples().get(r.clone()) {
                    if let Ok((s, d)) = extract_sbp_dbp(wave) {
                        sbp = Some(s);
                        dbp = Some(d);
                    }
                }
            }
            let row = ManifestRow {
                record_id: id.clone(),
                subject_id: label
                    .and_then(|l| l.subject_id.clone())
                    .unwrap_or_else(|| id.clone()),
                segment_index: index,
                tensor_path: format!("{TENSOR_DIR}/{id}_{index:05}.vgt"),
                age,
                age_group: age.and_then(AgeGroup::from_age),
                sbp,
                dbp,
                split: Split::Train,
            };
            plan.push(Planned { segment, row });
        }
    }
    if plan.is_empty() {
        return Err(Error::NoSegments);
    }

    let splits = match config.split_by {
        SplitBy::Segment => assign_splits(plan.len(), &config.fractions, config.seed),
        SplitBy::Subject => {
            let subjects: Vec<&str> = plan.iter().map(|p| p.row.subject_id.as_str()).collect();
            assign_subject_splits(&subjects, &config.fractions, config.seed)
        }
    };
    for (p, s) in plan.iter_mut().zip(splits) {
        p.row.split = s;
    }

    fs::create_dir_all(config.out_dir.join(TENSOR_DIR))?;
    if config.png {
        fs::create_dir_all(config.out_dir.join(PREVIEW_DIR))?;
    }

    let export = |p: &Planned| -> Result<()> {
        let series = p.segment.to_series(config.rate)?;
        let img = segment_to_image(&series, config.upscale)?;
        fs::write(config.out_dir.join(&p.row.tensor_path), encode(&img))?;
        if config.png {
            let name = format!("{}_{:05}.png", p.row.record_id, p.row.segment_index);
            img.write_png(&config.out_dir.join(PREVIEW_DIR).join(name))?;
        }
        Ok(())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| plan.par_iter().try_for_each(export))?;

    summary.manifest = RecordManifest {
        rows: plan.into_iter().map(|p| p.row).collect(),
    };
    summary
        .manifest
        .write_csv(&config.out_dir.join(MANIFEST_FILE))?;
    Ok(summary)
}

/// Checks that every row's tensor exists and decodes, and that split
/// labels are valid. Returns the number of distinct subjects per split.
pub fn verify_dataset(out_dir: &Path) -> Result<[usize; 3]> {
    let manifest = RecordManifest::read_csv(&out_dir.join(MANIFEST_FILE))?;
    manifest.validate()?;
    let mut subjects: [BTreeSet<&str>; 3] = Default::default();
    for row in &manifest.rows {
        crate::tensor::read_tensor(&out_dir.join(&row.tensor_path))?;
        subjects[row.split as usize].insert(&row.subject_id);
    }
    Ok(subjects.map(|s| s.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_within_one_row() {
        for n in 0..500 {
            let sizes = split_sizes(n, &DEFAULT_FRACTIONS);
            assert_eq!(sizes.iter().sum::<usize>(), n);
            for (s, f) in sizes.iter().zip(DEFAULT_FRACTIONS) {
                assert!((*s as f64 - f * n as f64).abs() <= 1.0, "n={n} {sizes:?}");
            }
        }
        assert_eq!(split_sizes(15303, &DEFAULT_FRACTIONS), [10131, 2586, 2586]);
    }

    #[test]
    fn fractions_validated() {
        assert!(validate_fractions(&[0.5, 0.5, 0.0]).is_ok());
        assert!(validate_fractions(&[0.5, 0.6, 0.0]).is_err());
        assert!(validate_fractions(&[1.2, -0.2, 0.0]).is_err());
        assert!(validate_fractions(&[f64::NAN, 0.5, 0.5]).is_err());
    }

    #[test]
    fn seeded_shuffle() {
        let a = assign_splits(100, &DEFAULT_FRACTIONS, 7);
        assert_eq!(a, assign_splits(100, &DEFAULT_FRACTIONS, 7));
        let b = assign_splits(100, &DEFAULT_FRACTIONS, 8);
        assert_ne!(a, b);
        let count = |v: &[Split], s: Split| v.iter().filter(|x| **x == s).count();
        for s in Split::ALL {
            assert_eq!(count(&a, s), count(&b, s));
        }
    }

    #[test]
    fn subject_splits_do_not_leak() {
        let subjects: Vec<String> = (0..200).map(|i| format!("s{}", i / 7)).collect();
        let refs: Vec<&str> = subjects.iter().map(String::as_str).collect();
        let splits = assign_subject_splits(&refs, &DEFAULT_FRACTIONS, 3);
        let mut seen: BTreeMap<&str, Split> = BTreeMap::new();
        for (s, sp) in refs.iter().zip(&splits) {
            assert_eq!(*seen.entry(s).or_insert(*sp), *sp);
        }
        assert!(Split::ALL.iter().all(|s| splits.contains(s)));
    }
}
