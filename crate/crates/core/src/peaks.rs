//! Local-maximum peak detection with prominence and distance filters.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Fraction of the interquartile range used as the default prominence.
pub const DEFAULT_PROMINENCE_IQR: f64 = 0.3;
/// Highest heart rate the default minimum distance allows.
pub const MAX_HEART_RATE_BPM: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakParams {
    pub min_prominence: f64,
    /// In samples.
    pub min_distance: usize,
}

impl PeakParams {
    /// Defaults for a PPG record: peaks at least one 200 bpm beat apart
    /// (15 samples at 50 Hz) and at least 0.3 x IQR prominent.
    pub fn for_record(series: &TimeSeries) -> Self {
        let min_distance =
            ((series.sampling_rate() * 60.0 / MAX_HEART_RATE_BPM).floor() as usize).max(1);
        Self {
            min_prominence: DEFAULT_PROMINENCE_IQR * interquartile_range(series.samples()),
            min_distance,
        }
    }
}

/// Strictly increasing indices of accepted peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    pub indices: Vec<usize>,
    pub params: PeakParams,
}

impl PeakList {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Finds local maxima whose topographic prominence is at least
/// `min_prominence`, then thins them so no two are closer than
/// `min_distance` samples. Conflicts keep the higher peak; equal heights
/// keep the lower index.
///
/// Flat-topped maxima are reported at the middle of the plateau (rounded
/// down). Series shorter than 3 samples have no peaks.
pub fn detect_peaks(
    series: &TimeSeries,
    min_prominence: f64,
    min_distance: usize,
) -> Result<PeakList> {
    if min_distance < 1 {
        return Err(Error::InvalidParameter(
            "min_distance must be at least 1".into(),
        ));
    }
    if min_prominence.is_nan() || min_prominence < 0.0 {
        return Err(Error::InvalidParameter(
            "min_prominence must be non-negative".into(),
        ));
    }
    let params = PeakParams {
        min_prominence,
        min_distance,
    };
    let y = series.samples();
    let candidates: Vec<usize> = local_maxima(y)
        .into_iter()
        .filter(|&p| prominence(y, p) >= min_prominence)
        .collect();
    Ok(PeakList {
        indices: thin_by_distance(y, candidates, min_distance),
        params,
    })
}

pub fn detect_peaks_with(series: &TimeSeries, params: PeakParams) -> Result<PeakList> {
    detect_peaks(series, params.min_prominence, params.min_distance)
}

fn local_maxima(y: &[f64]) -> Vec<usize> {
    let n = y.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let mut i = 1;
    while i < n - 1 {
        if y[i - 1] < y[i] {
            let mut ahead = i + 1;
            while ahead < n - 1 && y[ahead] == y[i] {
                ahead += 1;
            }
            if y[ahead] < y[i] {
                out.push((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Height of `peak` above the higher of the two lowest points reachable on
/// either side before meeting higher ground (or the series edge).
pub fn prominence(y: &[f64], peak: usize) -> f64 {
    let h = y[peak];
    let mut left_min = h;
    for &v in y[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &y[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn thin_by_distance(y: &[f64], peaks: Vec<usize>, min_distance: usize) -> Vec<usize> {
    if min_distance <= 1 || peaks.len() < 2 {
        return peaks;
    }
    let mut order: Vec<usize> = (0..peaks.len()).collect();
    order.sort_by(|&a, &b| y[peaks[b]].total_cmp(&y[peaks[a]]).then(a.cmp(&b)));
    let mut keep = vec![true; peaks.len()];
    for &k in &order {
        if !keep[k] {
            continue;
        }
        let p = peaks[k];
        for j in (0..k).rev() {
            if p - peaks[j] >= min_distance {
                break;
            }
            keep[j] = false;
        }
        for j in k + 1..peaks.len() {
            if peaks[j] - p >= min_distance {
                break;
            }
            keep[j] = false;
        }
    }
    peaks
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Linear-interpolated quantile of unsorted data; `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn interquartile_range(values: &[f64]) -> f64 {
    quantile(values, 0.75) - quantile(values, 0.25)
}
