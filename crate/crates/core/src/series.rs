use crate::error::{Error, Result};

/// A uniformly sampled, finite, non-empty signal.
///
/// Sample `i` sits at time `i / sampling_rate` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sampling_rate: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sampling_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(Error::InvalidRate(sampling_rate));
        }
        if let Some(i) = samples.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            samples,
            sampling_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false for a constructed series; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.sampling_rate
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Negates every sample; the sampling rate is kept.
pub fn invert_series(series: &TimeSeries) -> TimeSeries {
    TimeSeries {
        samples: series.samples.iter().map(|y| -y).collect(),
        sampling_rate: series.sampling_rate,
    }
}
