//! Synthetic signals for tests, benchmarks and demo datasets.
//!
//! The PPG model sums Gaussian bumps placed at fixed phases of each beat:
//! a systolic wave, a later diastolic wave and an optional narrow dip
//! between them that carves the dicrotic notch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::Result;
use crate::records::Record;
use crate::series::TimeSeries;

/// Shape of one cardiac cycle, in units of the beat period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub systolic_amp: f64,
    pub systolic_phase: f64,
    pub systolic_width: f64,
    pub diastolic_amp: f64,
    pub diastolic_phase: f64,
    pub diastolic_width: f64,
    pub notch_depth: f64,
    pub notch_phase: f64,
    pub notch_width: f64,
}

impl Default for PulseShape {
    fn default() -> Self {
        Self {
            systolic_amp: 1.0,
            systolic_phase: 0.2,
            systolic_width: 0.08,
            diastolic_amp: 0.4,
            diastolic_phase: 0.42,
            diastolic_width: 0.1,
            notch_depth: 0.08,
            notch_phase: 0.33,
            notch_width: 0.025,
        }
    }
}

impl PulseShape {
    pub fn without_notch(&self) -> Self {
        Self {
            notch_depth: 0.0,
            ..*self
        }
    }

    /// Value at `phase`, where a phase of 1 is one beat period. Neighbouring
    /// beats contribute their tails.
    pub fn value(&self, phase: f64) -> f64 {
        let local = phase.rem_euclid(1.0);
        let mut v = 0.0;
        for shift in [-1.0, 0.0, 1.0] {
            let p = local + shift;
            v += gauss(
                p,
                self.systolic_amp,
                self.systolic_phase,
                self.systolic_width,
            );
            v += gauss(
                p,
                self.diastolic_amp,
                self.diastolic_phase,
                self.diastolic_width,
            );
            v -= gauss(p, self.notch_depth, self.notch_phase, self.notch_width);
        }
        v
    }
}

fn gauss(x: f64, amp: f64, center: f64, width: f64) -> f64 {
    if amp == 0.0 {
        return 0.0;
    }
    let z = (x - center) / width;
    amp * (-0.5 * z * z).exp()
}

/// Noise-free pulse train at `bpm` beats per minute, `n` samples at `rate` Hz.
/// `phase0` shifts the first sample into the beat, in beat periods.
pub fn pulse_train(shape: &PulseShape, bpm: f64, rate: f64, n: usize, phase0: f64) -> Vec<f64> {
    let beats_per_sample = bpm / 60.0 / rate;
    (0..n)
        .map(|i| shape.value(phase0 + i as f64 * beats_per_sample))
        .collect()
}

/// Random pulse shape around the default, every parameter jittered.
pub fn random_shape<R: Rng + ?Sized>(rng: &mut R) -> PulseShape {
    let mut jitter = |base: f64, spread: f64| base * (1.0 + rng.random_range(-spread..spread));
    PulseShape {
        systolic_amp: jitter(1.0, 0.2),
        systolic_phase: jitter(0.2, 0.1),
        systolic_width: jitter(0.08, 0.15),
        diastolic_amp: jitter(0.4, 0.2),
        diastolic_phase: jitter(0.42, 0.05),
        diastolic_width: jitter(0.1, 0.15),
        notch_depth: jitter(0.08, 0.3),
        notch_phase: jitter(0.33, 0.03),
        notch_width: jitter(0.025, 0.2),
    }
}

/// A PPG-like record: random shape, heart rate in `bpm_range`, baseline
/// wander and additive white noise with standard deviation `noise`.
pub fn random_ppg<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    rate: f64,
    bpm_range: (f64, f64),
    noise: f64,
) -> Vec<f64> {
    let shape = random_shape(rng);
    let bpm = rng.random_range(bpm_range.0..=bpm_range.1);
    let phase0 = rng.random_range(0.0..1.0);
    let wander_amp = rng.random_range(0.0..0.1);
    let wander_hz = rng.random_range(0.1..0.3);
    let wander_phase = rng.random_range(0.0..std::f64::consts::TAU);
    let scale = rng.random_range(0.5..2.0);
    let offset = rng.random_range(-1.0..1.0);
    let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("finite std");
    pulse_train(&shape, bpm, rate, n, phase0)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let t = i as f64 / rate;
            let wander = wander_amp * (std::f64::consts::TAU * wander_hz * t + wander_phase).sin();
            let eps = if noise > 0.0 { normal.sample(rng) } else { 0.0 };
            offset + scale * (v + wander) + eps
        })
        .collect()
}

/// `count` seeded PPG records named `{prefix}{k:03}`, each `n` samples long.
pub fn synthetic_records(
    prefix: &str,
    count: usize,
    n: usize,
    rate: f64,
    bpm_range: (f64, f64),
    noise: f64,
    seed: u64,
) -> Result<Vec<Record>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let y = random_ppg(&mut rng, n, rate, bpm_range, noise);
            Ok(Record {
                id: format!("{prefix}{k:03}"),
                series: TimeSeries::new(y, rate)?,
            })
        })
        .collect()
}

/// A single rounded beat over `n` samples: two parabolic flanks meeting at
/// the peak with zero slope, rising from 0 to `amp` and falling back to 0.
/// The curve is concave throughout, which is what heavy low-pass filtering
/// leaves of a pulse.
pub fn rounded_pulse(n: usize, peak_phase: f64, amp: f64) -> Vec<f64> {
    let last = (n.max(2) - 1) as f64;
    (0..n)
        .map(|i| {
            let x = i as f64 / last;
            let side = if x <= peak_phase {
                peak_phase
            } else {
                1.0 - peak_phase
            };
            let z = (x - peak_phase) / side;
            amp * (1.0 - z * z)
        })
        .collect()
}

/// Dicrotic notch on a pulse: a narrow dip at `phase` followed by a
/// rebound wave 1.5 notch-widths later. Widths are in units of the
/// segment length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DicroticNotch {
    pub phase: f64,
    pub depth: f64,
    pub width: f64,
    pub rebound: f64,
}

impl DicroticNotch {
    pub fn apply(&self, pulse: &[f64]) -> Vec<f64> {
        let last = (pulse.len().max(2) - 1) as f64;
        pulse
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let x = i as f64 / last;
                v - gauss(x, self.depth, self.phase, self.width)
                    + gauss(
                        x,
                        self.rebound,
                        self.phase + 1.5 * self.width,
                        2.0 * self.width,
                    )
            })
            .collect()
    }
}

/// A rounded pulse with random peak position, amplitude and offset, and
/// the same pulse with a random notch on its downstroke.
pub fn random_notch_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let peak = rng.random_range(0.25..0.4);
    let amp = rng.random_range(0.5..2.0);
    let offset = rng.random_range(-1.0..1.0);
    let smooth: Vec<f64> = rounded_pulse(n, peak, amp)
        .into_iter()
        .map(|v| v + offset)
        .collect();
    let notch = DicroticNotch {
        phase: peak + rng.random_range(0.15..0.3),
        depth: amp * rng.random_range(0.05..0.15),
        width: rng.random_range(0.025..0.04),
        rebound: amp * rng.random_range(0.0..0.08),
    };
    let notched = notch.apply(&smooth);
    (smooth, notched)
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let dist = Uniform::new(0.0, 1.0).expect("valid range");
    dist.sample_iter(rng).take(n).collect()
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let dist = Normal::new(0.0, 1.0).expect("valid std");
    dist.sample_iter(rng).take(n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_is_periodic() {
        let s = PulseShape::default();
        for k in 0..10 {
            let p = k as f64 * 0.1;
            assert!((s.value(p) - s.value(p + 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_records_are_seeded() {
        let a = synthetic_records("r", 3, 100, 50.0, (60.0, 90.0), 0.01, 7).unwrap();
        let b = synthetic_records("r", 3, 100, 50.0, (60.0, 90.0), 0.01, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[2].id, "r002");
        assert_eq!(a[0].series.len(), 100);
    }

    #[test]
    fn rounded_pulse_is_concave() {
        let y = rounded_pulse(50, 0.3, 1.0);
        assert_eq!(y[0], 0.0);
        assert!(y[49].abs() < 1e-12);
        for w in y.windows(3) {
            assert!(w[0] + w[2] < 2.0 * w[1]);
        }
    }

    #[test]
    fn systolic_peak_dominates() {
        let s = PulseShape::default();
        let train = pulse_train(&s, 60.0, 100.0, 100, 0.0);
        let argmax = (0..train.len())
            .max_by(|a, b| train[*a].total_cmp(&train[*b]))
            .unwrap();
        // The diastolic tail nudges the maximum just past the systolic phase.
        assert!((20..=22).contains(&argmax), "{argmax}");
    }
}
