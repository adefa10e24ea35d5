//! Adjacency matrices as 8-bit images.
//!
//! A segment becomes a three-channel image: red is the visibility graph of
//! the signal, green that of the inverted signal and blue the slope-weighted
//! graph of the inverted signal. Binary channels map edges to 255. The
//! weighted channel is divided by its own maximum, so the whole image is
//! unchanged by positive affine transforms of the segment.

use std::path::Path;

use crate::adjacency::{AdjacencyMatrix, MatrixKind};
use crate::error::{Error, Result};
use crate::series::{invert_series, TimeSeries};
use crate::visibility::{build_vg_fast, slope, slope_weights, visible_edges};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStack {
    /// Visibility graph of the signal.
    pub signal: AdjacencyMatrix,
    /// Visibility graph of the inverted signal.
    pub inverted: AdjacencyMatrix,
    /// Slope-weighted visibility graph of the inverted signal.
    pub inverted_slope: AdjacencyMatrix,
}

impl ChannelStack {
    pub fn n(&self) -> usize {
        self.signal.n()
    }
}

pub fn build_channel_stack(series: &TimeSeries) -> Result<ChannelStack> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter(
            "segment needs at least 2 samples".into(),
        ));
    }
    let inverted_series = invert_series(series);
    let signal = build_vg_fast(series);
    let inverted = build_vg_fast(&inverted_series);
    let inverted_slope = slope_weights(&inverted_series, &inverted);
    Ok(ChannelStack {
        signal,
        inverted,
        inverted_slope,
    })
}

/// Row-major 8-bit image, channel-interleaved when `channels == 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageTensor {
    width: u32,
    height: u32,
    channels: u32,
    pixels: Vec<u8>,
}

impl ImageTensor {
    pub fn new(width: u32, height: u32, channels: u32, pixels: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        let expected = payload_len(width, height, channels).ok_or(Error::DimensionOverflow)?;
        if pixels.len() != expected {
            return Err(Error::LengthMismatch {
                left: pixels.len(),
                right: expected,
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize, channel: usize) -> u8 {
        let c = self.channels as usize;
        self.pixels[(row * self.width as usize + col) * c + channel]
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let color = if self.channels == 3 {
            ::image::ExtendedColorType::Rgb8
        } else {
            ::image::ExtendedColorType::L8
        };
        ::image::save_buffer(path, &self.pixels, self.width, self.height, color)?;
        Ok(())
    }
}

pub(crate) fn payload_len(width: u32, height: u32, channels: u32) -> Option<usize> {
    (width as usize)
        .checked_mul(height as usize)?
        .checked_mul(channels as usize)
}

/// 8-bit level of one matrix entry: binary edges become 255, weights are
/// scaled so `max` maps to 255 (round half up). `max == 0` gives black.
#[inline(always)]
fn level(kind: MatrixKind, w: f64, max: f64) -> u8 {
    match kind {
        MatrixKind::Binary => {
            if w != 0.0 {
                255
            } else {
                0
            }
        }
        MatrixKind::SlopeWeighted => {
            if w == 0.0 || max == 0.0 {
                0
            } else {
                ((w / max) * 255.0 + 0.5).floor() as u8
            }
        }
    }
}

/// Nearest-neighbour index map from `size` destination pixels onto `n`
/// source pixels.
fn resample_index(n: usize, size: usize) -> Vec<usize> {
    (0..size).map(|p| p * n / size).collect()
}

fn target_side(n: usize, upscale: Option<usize>) -> Result<usize> {
    match upscale {
        Some(side) if side < n => Err(Error::DownscalingNotSupported),
        Some(side) => Ok(side),
        None => Ok(n),
    }
}

fn side_u32(side: usize) -> Result<u32> {
    u32::try_from(side).map_err(|_| Error::DimensionOverflow)
}

/// RGB image of a channel stack, optionally upscaled to `upscale x upscale`
/// by nearest neighbour.
pub fn stack_to_image(stack: &ChannelStack, upscale: Option<usize>) -> Result<ImageTensor> {
    let n = stack.n();
    let side = target_side(n, upscale)?;
    let channels = [&stack.signal, &stack.inverted, &stack.inverted_slope];
    let maxima = channels.map(|m| m.max_weight());
    let map = resample_index(n, side);
    let mut pixels = vec![0u8; side * side * 3];
    for (out_row, &i) in pixels.chunks_exact_mut(side * 3).zip(&map) {
        let rows = channels.map(|m| m.row(i));
        for (px, &j) in out_row.chunks_exact_mut(3).zip(&map) {
            for c in 0..3 {
                px[c] = level(channels[c].kind(), rows[c][j], maxima[c]);
            }
        }
    }
    let side = side_u32(side)?;
    ImageTensor::new(side, side, 3, pixels)
}

/// RGB image of a segment, equal to
/// `stack_to_image(&build_channel_stack(series)?, upscale)` but built from
/// edge lists without the dense matrices.
pub fn segment_to_image(series: &TimeSeries, upscale: Option<usize>) -> Result<ImageTensor> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "segment needs at least 2 samples".into(),
        ));
    }
    let side = target_side(n, upscale)?;
    let inverted_series = invert_series(series);
    let signal = visible_edges(series);
    let inverted = visible_edges(&inverted_series);
    let weights: Vec<f64> = inverted
        .iter()
        .map(|&(a, b)| slope(&inverted_series, a, b))
        .collect();
    let max = weights.iter().copied().fold(0.0, f64::max);

    // Output rows/columns `span[i]..span[i + 1]` come from source sample i.
    let mut span = vec![0usize; n + 1];
    for p in (0..side).rev() {
        span[p * n / side] = p;
    }
    span[n] = side;

    let mut pixels = vec![0u8; side * side * 3];
    let mut paint = |a: usize, b: usize, channel: usize, value: u8| {
        for (r, c) in [(a, b), (b, a)] {
            for row in span[r]..span[r + 1] {
                let base = row * side * 3;
                for col in span[c]..span[c + 1] {
                    pixels[base + col * 3 + channel] = value;
                }
            }
        }
    };
    for &(a, b) in &signal {
        paint(a, b, 0, 255);
    }
    for (&(a, b), &w) in inverted.iter().zip(&weights) {
        paint(a, b, 1, 255);
        paint(a, b, 2, level(MatrixKind::SlopeWeighted, w, max));
    }
    let side = side_u32(side)?;
    ImageTensor::new(side, side, 3, pixels)
}

/// Single-channel image of one matrix: black-and-white for binary graphs,
/// grayscale for weighted ones.
pub fn matrix_to_image(m: &AdjacencyMatrix, upscale: Option<usize>) -> Result<ImageTensor> {
    let n = m.n();
    let side = target_side(n, upscale)?;
    let max = m.max_weight();
    let map = resample_index(n, side);
    let mut pixels = Vec::with_capacity(side * side);
    for &i in &map {
        let row = m.row(i);
        pixels.extend(map.iter().map(|&j| level(m.kind(), row[j], max)));
    }
    let side = side_u32(side)?;
    ImageTensor::new(side, side, 1, pixels)
}
