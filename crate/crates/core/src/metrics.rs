//! Blood-pressure evaluation: SBP/DBP extraction, MAE and BHS grading.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Systolic and diastolic pressure of a window, taken as its maximum and
/// minimum.
pub fn extract_sbp_dbp(window: &[f64]) -> Result<(f64, f64)> {
    if window.len() < 2 {
        return Err(Error::InvalidParameter(
            "blood-pressure window needs at least 2 samples".into(),
        ));
    }
    if let Some(i) = window.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let sbp = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dbp = window.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((sbp, dbp))
}

pub fn mean_absolute_error(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(total / pred.len() as f64)
}

pub fn absolute_errors(pred: &[f64], truth: &[f64]) -> Result<Vec<f64>> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Grade::A => "A",
            Grade::B => "B",
            Grade::C => "C",
            Grade::D => "D",
        };
        f.write_str(s)
    }
}

/// Minimum cumulative percentages within 5, 10 and 15 mmHg for grades A-C
/// of the British Hypertension Society protocol.
pub const BHS_THRESHOLDS: [(Grade, [f64; 3]); 3] = [
    (Grade::A, [80.0, 90.0, 95.0]),
    (Grade::B, [65.0, 85.0, 95.0]),
    (Grade::C, [45.0, 75.0, 90.0]),
];

/// Which of the three thresholds of each grade are met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeCriteria {
    #[serde(rename = "A")]
    pub a: [bool; 3],
    #[serde(rename = "B")]
    pub b: [bool; 3],
    #[serde(rename = "C")]
    pub c: [bool; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhsReport {
    pub pct_le_5: f64,
    pub pct_le_10: f64,
    pub pct_le_15: f64,
    pub grade: Grade,
}

impl BhsReport {
    /// Grades already-computed percentages. A grade needs all three of its
    /// thresholds; anything below C is D.
    pub fn from_percentages(pct_le_5: f64, pct_le_10: f64, pct_le_15: f64) -> Self {
        let pct = [pct_le_5, pct_le_10, pct_le_15];
        let grade = BHS_THRESHOLDS
            .iter()
            .find(|(_, min)| pct.iter().zip(min).all(|(p, m)| p >= m))
            .map_or(Grade::D, |(g, _)| *g);
        Self {
            pct_le_5,
            pct_le_10,
            pct_le_15,
            grade,
        }
    }

    pub fn criteria(&self) -> GradeCriteria {
        let pct = [self.pct_le_5, self.pct_le_10, self.pct_le_15];
        let met = |min: &[f64; 3]| [pct[0] >= min[0], pct[1] >= min[1], pct[2] >= min[2]];
        GradeCriteria {
            a: met(&BHS_THRESHOLDS[0].1),
            b: met(&BHS_THRESHOLDS[1].1),
            c: met(&BHS_THRESHOLDS[2].1),
        }
    }
}

pub fn grade_bhs(abs_errors: &[f64]) -> Result<BhsReport> {
    if abs_errors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(i) = abs_errors
        .iter()
        .position(|e| !(e.is_finite() && *e >= 0.0))
    {
        return Err(Error::InvalidParameter(format!(
            "absolute error at index {i} is negative or non-finite"
        )));
    }
    let n = abs_errors.len() as f64;
    let pct = |limit: f64| 100.0 * abs_errors.iter().filter(|e| **e <= limit).count() as f64 / n;
    Ok(BhsReport::from_percentages(pct(5.0), pct(10.0), pct(15.0)))
}

/// The metrics JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub pct_le_5: f64,
    pub pct_le_10: f64,
    pub pct_le_15: f64,
    pub grade: Grade,
    pub criteria: GradeCriteria,
}

impl MetricsReport {
    pub fn compute(pred: &[f64], truth: &[f64]) -> Result<Self> {
        let mae = mean_absolute_error(pred, truth)?;
        let bhs = grade_bhs(&absolute_errors(pred, truth)?)?;
        Ok(Self {
            mae,
            pct_le_5: bhs.pct_le_5,
            pct_le_10: bhs.pct_le_10,
            pct_le_15: bhs.pct_le_15,
            grade: bhs.grade,
            criteria: bhs.criteria(),
        })
    }
}

/// Waveform-level evaluation: sample MAE over all windows, plus BHS
/// reports for the SBP and DBP extracted from each window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformReport {
    pub waveform: MetricsReport,
    pub sbp: MetricsReport,
    pub dbp: MetricsReport,
}

impl WaveformReport {
    pub fn compute(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: pred.len(),
                right: truth.len(),
            });
        }
        let mut flat_pred = Vec::new();
        let mut flat_truth = Vec::new();
        let (mut sbp_p, mut sbp_t, mut dbp_p, mut dbp_t) = (vec![], vec![], vec![], vec![]);
        for (p, t) in pred.iter().zip(truth) {
            if p.len() != t.len() {
                return Err(Error::LengthMismatch {
                    left: p.len(),
                    right: t.len(),
                });
            }
            flat_pred.extend_from_slice(p);
            flat_truth.extend_from_slice(t);
            let (s, d) = extract_sbp_dbp(p)?;
            sbp_p.push(s);
            dbp_p.push(d);
            let (s, d) = extract_sbp_dbp(t)?;
            sbp_t.push(s);
            dbp_t.push(d);
        }
        Ok(Self {
            waveform: MetricsReport::compute(&flat_pred, &flat_truth)?,
            sbp: MetricsReport::compute(&sbp_p, &sbp_t)?,
            dbp: MetricsReport::compute(&dbp_p, &dbp_t)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbp_dbp() {
        let wave: Vec<f64> = (0..200)
            .map(|i| 100.0 + 20.0 * (std::f64::consts::TAU * i as f64 / 40.0).sin())
            .collect();
        let (s, d) = extract_sbp_dbp(&wave).unwrap();
        assert!((s - 120.0).abs() < 1e-9 && (d - 80.0).abs() < 1e-9);
        assert_eq!(extract_sbp_dbp(&[100.0; 5]).unwrap(), (100.0, 100.0));
        assert!(extract_sbp_dbp(&[1.0]).is_err());
        assert!(matches!(
            extract_sbp_dbp(&[1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn two_beats_take_the_higher() {
        // Two half-sine beats over a diastolic floor of 78 mmHg.
        let beat = |peak: f64| -> Vec<f64> {
            (0..49)
                .map(|i| 78.0 + (peak - 78.0) * (std::f64::consts::PI * i as f64 / 48.0).sin())
                .collect()
        };
        let mut wave = beat(118.0);
        wave.extend(beat(122.0));
        let expected_max = wave.iter().copied().fold(f64::MIN, f64::max);
        let (s, d) = extract_sbp_dbp(&wave).unwrap();
        assert_eq!(s, expected_max);
        assert!((s - 122.0).abs() < 1e-9);
        assert_eq!(d, 78.0);
    }

    #[test]
    fn mae() {
        assert_eq!(mean_absolute_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mean_absolute_error(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 1.5);
        assert!(matches!(
            mean_absolute_error(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(mean_absolute_error(&[], &[]).is_err());
    }

    #[test]
    fn bhs_table_rows() {
        assert_eq!(
            BhsReport::from_percentages(83.93, 96.03, 98.77).grade,
            Grade::A
        );
        // Fails C's 90% limit within 15 mmHg.
        let sbp = BhsReport::from_percentages(48.87, 75.87, 88.40);
        assert_eq!(sbp.grade, Grade::D);
        assert_eq!(sbp.criteria().c, [true, true, false]);
        assert_eq!(
            BhsReport::from_percentages(70.0, 86.0, 95.0).grade,
            Grade::B
        );
        assert_eq!(
            BhsReport::from_percentages(80.0, 90.0, 95.0).grade,
            Grade::A
        );
        // A needs all three; 94.9 drops it to C.
        assert_eq!(
            BhsReport::from_percentages(99.0, 99.0, 94.9).grade,
            Grade::C
        );
    }

    #[test]
    fn grade_from_errors() {
        let r = grade_bhs(&[0.0; 10]).unwrap();
        assert_eq!(
            (r.pct_le_5, r.pct_le_10, r.pct_le_15),
            (100.0, 100.0, 100.0)
        );
        assert_eq!(r.grade, Grade::A);

        // Boundaries are inclusive.
        let r = grade_bhs(&[5.0, 10.0, 15.0, 15.5]).unwrap();
        assert_eq!((r.pct_le_5, r.pct_le_10, r.pct_le_15), (25.0, 50.0, 75.0));
        assert_eq!(r.grade, Grade::D);

        assert!(matches!(grade_bhs(&[]), Err(Error::EmptyInput)));
        assert!(grade_bhs(&[-1.0]).is_err());
    }

    #[test]
    fn metrics_json_keys() {
        let r = MetricsReport::compute(&[1.0, 2.0], &[2.0, 4.0]).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["mae", "pct_le_5", "pct_le_10", "pct_le_15", "grade"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["grade"], "A");
        assert_eq!(v["mae"], 1.5);
    }

    #[test]
    fn waveform_report() {
        let truth = vec![vec![80.0, 120.0, 100.0], vec![70.0, 110.0, 90.0]];
        let pred = vec![vec![82.0, 118.0, 100.0], vec![70.0, 130.0, 90.0]];
        let r = WaveformReport::compute(&pred, &truth).unwrap();
        assert!((r.waveform.mae - 24.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.sbp.mae, 11.0);
        assert_eq!(r.dbp.mae, 1.0);
        assert_eq!(r.dbp.grade, Grade::A);
    }
}
