//! Per-segment latency of the image pipeline (segment to RGB image).

use std::hint::black_box;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::image::{build_channel_stack, segment_to_image, stack_to_image, ImageTensor};
use crate::series::TimeSeries;
use crate::synth;

/// Which implementation of the segment-to-image step is timed. Both
/// produce identical images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchPipeline {
    /// [`build_channel_stack`] followed by [`stack_to_image`].
    #[default]
    Dense,
    /// [`segment_to_image`], which works from edge lists.
    Fused,
}

impl BenchPipeline {
    fn run(self, s: &TimeSeries) -> Result<ImageTensor> {
        match self {
            BenchPipeline::Dense => stack_to_image(&build_channel_stack(s)?, None),
            BenchPipeline::Fused => segment_to_image(s, None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub segments: usize,
    pub segment_len: usize,
    pub rate: f64,
    pub warmup: usize,
    pub seed: u64,
    pub pipeline: BenchPipeline,
}

impl Default for BenchConfig {
    /// 1000 PPG windows of 224 samples at 125 Hz (1.792 s each).
    fn default() -> Self {
        Self {
            segments: 1000,
            segment_len: 224,
            rate: 125.0,
            warmup: 100,
            seed: 0,
            pipeline: BenchPipeline::Dense,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchReport {
    pub pipeline: BenchPipeline,
    pub segments: usize,
    pub segment_len: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub total_s: f64,
}

/// Synthetic PPG windows with noise, heart rate 50-150 bpm.
pub fn bench_segments(config: &BenchConfig) -> Result<Vec<TimeSeries>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.segments)
        .map(|_| {
            let y = synth::random_ppg(
                &mut rng,
                config.segment_len,
                config.rate,
                (50.0, 150.0),
                0.01,
            );
            TimeSeries::new(y, config.rate)
        })
        .collect()
}

pub fn bench_segment(config: &BenchConfig) -> Result<BenchReport> {
    let segments = bench_segments(config)?;
    for s in segments
        .iter()
        .cycle()
        .take(config.warmup.min(segments.len() * 10))
    {
        black_box(config.pipeline.run(s)?);
    }
    let start = Instant::now();
    let mut times = Vec::with_capacity(segments.len());
    for s in &segments {
        let t0 = Instant::now();
        let img = config.pipeline.run(black_box(s))?;
        times.push(t0.elapsed().as_secs_f64() * 1e3);
        black_box(img);
    }
    let total_s = start.elapsed().as_secs_f64();
    let mean_ms = times.iter().sum::<f64>() / times.len().max(1) as f64;
    times.sort_by(f64::total_cmp);
    let pick = |q: f64| {
        if times.is_empty() {
            0.0
        } else {
            times[((times.len() - 1) as f64 * q).round() as usize]
        }
    };
    Ok(BenchReport {
        pipeline: config.pipeline,
        segments: segments.len(),
        segment_len: config.segment_len,
        mean_ms,
        median_ms: pick(0.5),
        p99_ms: pick(0.99),
        total_s,
    })
}
