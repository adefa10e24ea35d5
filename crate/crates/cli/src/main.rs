use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use ppgraph::dataset::validate_fractions;
use ppgraph::metrics::WaveformReport;
use ppgraph::records::{read_records, write_records, Record};
use ppgraph::segment::{PULSE_LEN, WINDOW_LEN};
use ppgraph::{
    bench_segment, build_dataset, build_vg_fast, build_vg_oracle, build_vg_slope_weighted,
    invert_series, matrix_to_image, segment_record, segment_to_image, synth, tensor,
    verify_dataset, BenchConfig, BenchPipeline, DatasetConfig, MetricsReport, SegmentMode, SplitBy,
};

/// Visibility-graph images of physiological waveforms.
#[derive(Debug, Parser)]
#[command(name = "ppgraph", version)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split records into pulses or windows and print them as CSV.
    Segment(SegmentArgs),
    /// Dump the adjacency matrix of one record as CSV.
    Graph(GraphArgs),
    /// Convert one record to a VGT1 tensor.
    Image(ImageArgs),
    /// Batch-convert records to tensors plus a manifest with splits.
    Dataset(DatasetArgs),
    /// Check that a dataset's manifest and tensors are consistent.
    Verify(VerifyArgs),
    /// MAE and BHS grade of predictions against ground truth.
    Metrics(MetricsArgs),
    /// Time the segment-to-image step on synthetic PPG.
    Bench(BenchArgs),
    /// Write seeded synthetic PPG records.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Pulse,
    Window,
}

#[derive(Debug, Args)]
struct SegmentOpts {
    #[arg(long, value_enum, default_value_t = Mode::Pulse)]
    mode: Mode,
    /// Pulse length after padding or truncation.
    #[arg(long, default_value_t = PULSE_LEN, value_parser = positive_usize)]
    pulse_len: usize,
    #[arg(long, default_value_t = WINDOW_LEN, value_parser = positive_usize)]
    window_len: usize,
    /// Window stride; defaults to the window length.
    #[arg(long, value_parser = positive_usize)]
    stride: Option<usize>,
}

impl SegmentOpts {
    fn mode(&self) -> SegmentMode {
        match self.mode {
            Mode::Pulse => SegmentMode::Pulse {
                target_len: self.pulse_len,
            },
            Mode::Window => SegmentMode::Window {
                window_len: self.window_len,
                stride: self.stride.unwrap_or(self.window_len),
            },
        }
    }
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long)]
    input: PathBuf,
    /// Sampling rate in Hz.
    #[arg(long, value_parser = positive_f64)]
    rate: f64,
    #[command(flatten)]
    segmentation: SegmentOpts,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphKind {
    Binary,
    Slope,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = positive_f64)]
    rate: f64,
    /// Record to use when the input holds several.
    #[arg(long)]
    record: Option<String>,
    #[arg(long, value_enum, default_value_t = GraphKind::Binary)]
    kind: GraphKind,
    /// Use the inverted signal.
    #[arg(long)]
    invert: bool,
    /// Use the brute-force reference construction (binary only).
    #[arg(long)]
    oracle: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the matrix as a PNG.
    #[arg(long)]
    png: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ImageArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = positive_f64)]
    rate: f64,
    #[arg(long)]
    record: Option<String>,
    /// Nearest-neighbour upscale to this side length.
    #[arg(long, value_parser = positive_usize)]
    upscale: Option<usize>,
    /// Output VGT1 file.
    #[arg(long)]
    out: PathBuf,
    /// Also write a PNG preview.
    #[arg(long)]
    png: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitByArg {
    Segment,
    Subject,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Record CSV files.
    #[arg(long, required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_parser = positive_f64)]
    rate: f64,
    #[command(flatten)]
    segmentation: SegmentOpts,
    #[arg(long, value_parser = positive_usize)]
    upscale: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train, validation and test fractions.
    #[arg(long, value_parser = parse_split, default_value = "0.662,0.169,0.169")]
    split: [f64; 3],
    #[arg(long, value_enum, default_value_t = SplitByArg::Segment)]
    split_by: SplitByArg,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Also write PNG previews.
    #[arg(long)]
    png: bool,
    /// Labels CSV: record_id[,subject_id][,age][,sbp][,dbp].
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Blood-pressure records aligned with the inputs; per-segment SBP/DBP
    /// are taken from them.
    #[arg(long, num_args = 1..)]
    bp_records: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Dataset directory.
    dir: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Treat each record as a blood-pressure window and also grade the
    /// SBP and DBP extracted from it.
    #[arg(long)]
    waveform: bool,
    /// Output JSON; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PipelineArg {
    Dense,
    Fused,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    segments: usize,
    #[arg(long, default_value_t = WINDOW_LEN, value_parser = positive_usize)]
    window_len: usize,
    #[arg(long, default_value_t = 125.0, value_parser = positive_f64)]
    rate: f64,
    #[arg(long, default_value_t = 100)]
    warmup: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PipelineArg::Dense)]
    pipeline: PipelineArg,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10, value_parser = positive_usize)]
    records: usize,
    /// Record length in seconds.
    #[arg(long, default_value_t = 60.0, value_parser = positive_f64)]
    seconds: f64,
    #[arg(long, value_parser = positive_f64)]
    rate: f64,
    /// Heart rate, or a range `LO,HI` to draw from.
    #[arg(long, value_parser = parse_bpm, default_value = "60,100")]
    bpm: (f64, f64),
    /// Standard deviation of additive noise.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value = "rec")]
    prefix: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV in the record_id,sample_index,value layout.
    #[arg(long)]
    out: PathBuf,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn parse_split(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("{s:?}: {e}"))?;
    let fractions: [f64; 3] = parts
        .try_into()
        .map_err(|_| format!("expected three comma-separated fractions, got {s:?}"))?;
    validate_fractions(&fractions).map_err(|e| e.to_string())?;
    Ok(fractions)
}

fn parse_bpm(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| positive_f64(p.trim()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [v] => Ok((v, v)),
        [lo, hi] if lo <= hi => Ok((lo, hi)),
        _ => Err(format!("expected BPM or LO,HI with LO <= HI, got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Segment(a) => segment(a),
        Command::Graph(a) => graph(a),
        Command::Image(a) => image(a),
        Command::Dataset(a) => dataset(a),
        Command::Verify(a) => verify(a),
        Command::Metrics(a) => metrics(a),
        Command::Bench(a) => bench(a),
        Command::Synth(a) => synthesize(a),
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_records(path: &Path, rate: f64) -> anyhow::Result<Vec<Record>> {
    let batch = read_records(path, rate).with_context(|| format!("reading {}", path.display()))?;
    for r in &batch.rejected {
        warn!("skipping record {}: {}", r.id, r.error);
    }
    Ok(batch.records)
}

fn select_record(path: &Path, rate: f64, id: Option<&str>) -> anyhow::Result<Record> {
    let mut records = load_records(path, rate)?;
    match id {
        Some(id) => records
            .into_iter()
            .find(|r| r.id == id)
            .ok_or_else(|| anyhow!("no usable record {id:?} in {}", path.display())),
        None if records.len() == 1 => Ok(records.remove(0)),
        None if records.is_empty() => bail!("no usable records in {}", path.display()),
        None => bail!(
            "{} holds {} records; choose one with --record",
            path.display(),
            records.len()
        ),
    }
}

fn segment(a: SegmentArgs) -> anyhow::Result<()> {
    let records = load_records(&a.input, a.rate)?;
    let mode = a.segmentation.mode();
    let mut out = output(a.out.as_deref())?;
    writeln!(
        out,
        "record_id,segment_index,provenance,start,end,sample_index,value"
    )?;
    let mut total = 0;
    for record in &records {
        let (segments, rejected) = match segment_record(record, mode) {
            Ok(s) => s,
            Err(e) => {
                warn!("skipping record {}: {e}", record.id);
                continue;
            }
        };
        if rejected > 0 {
            info!(
                "{}: dropped {rejected} windows containing a plateau",
                record.id
            );
        }
        for (index, seg) in &segments {
            for (i, v) in seg.samples.iter().enumerate() {
                writeln!(
                    out,
                    "{},{index},{},{},{},{i},{v}",
                    record.id, seg.provenance, seg.source_range.start, seg.source_range.end
                )?;
            }
        }
        total += segments.len();
    }
    out.flush()?;
    info!("{total} segments from {} records", records.len());
    Ok(())
}

fn graph(a: GraphArgs) -> anyhow::Result<()> {
    let record = select_record(&a.input, a.rate, a.record.as_deref())?;
    let series = if a.invert {
        invert_series(&record.series)
    } else {
        record.series
    };
    let matrix = match (a.kind, a.oracle) {
        (GraphKind::Binary, false) => build_vg_fast(&series),
        (GraphKind::Binary, true) => build_vg_oracle(&series),
        (GraphKind::Slope, false) => build_vg_slope_weighted(&series),
        (GraphKind::Slope, true) => bail!("--oracle only applies to --kind binary"),
    };
    let mut out = output(a.out.as_deref())?;
    matrix.write_csv(&mut out)?;
    out.flush()?;
    if let Some(png) = &a.png {
        matrix_to_image(&matrix, None)?.write_png(png)?;
    }
    info!("{} vertices, {} edges", matrix.n(), matrix.edge_count());
    Ok(())
}

fn image(a: ImageArgs) -> anyhow::Result<()> {
    let record = select_record(&a.input, a.rate, a.record.as_deref())?;
    let img = segment_to_image(&record.series, a.upscale)?;
    tensor::write_tensor(&img, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(png) = &a.png {
        img.write_png(png)?;
    }
    Ok(())
}

fn dataset(a: DatasetArgs) -> anyhow::Result<()> {
    let mut config = DatasetConfig::new(a.inputs, a.rate, a.out.clone());
    config.mode = a.segmentation.mode();
    config.fractions = a.split;
    config.seed = a.seed;
    config.workers = a.workers;
    config.upscale = a.upscale;
    config.png = a.png;
    config.split_by = match a.split_by {
        SplitByArg::Segment => SplitBy::Segment,
        SplitByArg::Subject => SplitBy::Subject,
    };
    config.labels = a.labels;
    config.bp_inputs = a.bp_records;
    let summary = build_dataset(&config)?;
    let [train, val, test] = summary.manifest.split_counts();
    println!(
        "{} segments from {} records (train {train}, val {val}, test {test}) in {}",
        summary.manifest.rows.len(),
        summary.records_used,
        a.out.display()
    );
    if summary.files_skipped + summary.records_skipped + summary.plateau_rejected > 0 {
        println!(
            "skipped: {} files, {} records, {} plateau windows",
            summary.files_skipped, summary.records_skipped, summary.plateau_rejected
        );
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> anyhow::Result<()> {
    let [train, val, test] = verify_dataset(&a.dir)?;
    println!("ok: subjects per split train {train}, val {val}, test {test}");
    Ok(())
}

fn metrics(a: MetricsArgs) -> anyhow::Result<()> {
    let pred = load_records(&a.pred, 1.0)?;
    let truth = load_records(&a.truth, 1.0)?;
    let ids = |r: &[Record]| r.iter().map(|x| x.id.clone()).collect::<Vec<_>>();
    // Two single-record files pair up whatever their names.
    let single = pred.len() == 1 && truth.len() == 1;
    if !single && ids(&pred) != ids(&truth) {
        bail!(
            "prediction records {:?} do not match truth records {:?}",
            ids(&pred),
            ids(&truth)
        );
    }
    let values = |r: Vec<Record>| -> Vec<Vec<f64>> {
        r.into_iter().map(|x| x.series.into_samples()).collect()
    };
    let (pred, truth) = (values(pred), values(truth));
    let json = if a.waveform {
        serde_json::to_string_pretty(&WaveformReport::compute(&pred, &truth)?)?
    } else {
        let flat = |v: Vec<Vec<f64>>| v.into_iter().flatten().collect::<Vec<_>>();
        serde_json::to_string_pretty(&MetricsReport::compute(&flat(pred), &flat(truth))?)?
    };
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(())
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let report = bench_segment(&BenchConfig {
        segments: a.segments,
        segment_len: a.window_len,
        rate: a.rate,
        warmup: a.warmup,
        seed: a.seed,
        pipeline: match a.pipeline {
            PipelineArg::Dense => BenchPipeline::Dense,
            PipelineArg::Fused => BenchPipeline::Fused,
        },
    })?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!(
            "{} segments of {} samples: mean {:.3} ms, median {:.3} ms, p99 {:.3} ms ({:.2} s total)",
            report.segments,
            report.segment_len,
            report.mean_ms,
            report.median_ms,
            report.p99_ms,
            report.total_s
        );
    }
    Ok(())
}

fn synthesize(a: SynthArgs) -> anyhow::Result<()> {
    let n = (a.seconds * a.rate).round() as usize;
    let records =
        synth::synthetic_records(&a.prefix, a.records, n, a.rate, a.bpm, a.noise, a.seed)?;
    write_records(&a.out, &records).with_context(|| format!("writing {}", a.out.display()))?;
    info!("{} records of {n} samples", records.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ppgraph::dataset::DEFAULT_FRACTIONS;

    #[test]
    fn split_parsing() {
        assert_eq!(parse_split("0.662,0.169,0.169").unwrap(), DEFAULT_FRACTIONS);
        assert!(parse_split("0.5,0.5").is_err());
        assert!(parse_split("0.5,0.6,0.1").is_err());
        assert!(parse_split("a,b,c").is_err());
    }

    #[test]
    fn bpm_parsing() {
        assert_eq!(parse_bpm("60").unwrap(), (60.0, 60.0));
        assert_eq!(parse_bpm("60, 90").unwrap(), (60.0, 90.0));
        assert!(parse_bpm("90,60").is_err());
        assert!(parse_bpm("-1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
