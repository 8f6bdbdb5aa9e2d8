use alloc::vec::Vec;

use super::{check_labels, PredictError, TrainError};
use crate::features::FeatureMatrix;

/// Which side of the threshold is the track class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Polarity {
    PositiveAbove,
    PositiveBelow,
}

/// One-level tree on the pixel amplitude (feature 0).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StumpModel {
    pub threshold: f64,
    pub polarity: Polarity,
}

#[inline]
fn gini_weighted(pos: f64, total: f64) -> f64 {
    // total * gini = total - (pos² + neg²) / total
    if total == 0.0 {
        return 0.0;
    }
    let neg = total - pos;
    total - (pos * pos + neg * neg) / total
}

/// Picks the amplitude threshold with the largest Gini impurity decrease.
///
/// Candidates are midpoints between adjacent distinct amplitudes; ties go
/// to the smaller threshold. Polarity points at the side with the higher
/// track fraction.
pub fn train_stump(amplitudes: &[f32], labels: &[u8]) -> Result<StumpModel, TrainError> {
    check_labels(amplitudes.len(), labels)?;
    let mut pairs: Vec<(f32, u8)> = amplitudes.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let total = pairs.len() as f64;
    let total_pos = pairs.iter().filter(|p| p.1 == 1).count() as f64;

    let mut best: Option<(f64, f64, bool)> = None; // (child impurity, threshold, above)
    let mut left_pos = 0.0;
    for i in 0..pairs.len() - 1 {
        if pairs[i].1 == 1 {
            left_pos += 1.0;
        }
        if pairs[i].0 >= pairs[i + 1].0 {
            continue;
        }
        let left_n = (i + 1) as f64;
        let right_n = total - left_n;
        let right_pos = total_pos - left_pos;
        let impurity = gini_weighted(left_pos, left_n) + gini_weighted(right_pos, right_n);
        if best.is_none_or(|(b, _, _)| impurity < b) {
            let threshold = 0.5 * (pairs[i].0 as f64 + pairs[i + 1].0 as f64);
            let above = right_pos / right_n >= left_pos / left_n;
            best = Some((impurity, threshold, above));
        }
    }

    Ok(match best {
        Some((_, threshold, above)) => StumpModel {
            threshold,
            polarity: if above {
                Polarity::PositiveAbove
            } else {
                Polarity::PositiveBelow
            },
        },
        // every amplitude identical: nothing to separate
        None => StumpModel {
            threshold: pairs[0].0 as f64,
            polarity: Polarity::PositiveAbove,
        },
    })
}

impl StumpModel {
    /// Hard decision for one amplitude.
    pub fn predict(&self, amplitude: f32) -> u8 {
        let above = amplitude as f64 > self.threshold;
        match self.polarity {
            Polarity::PositiveAbove => above as u8,
            Polarity::PositiveBelow => (!above) as u8,
        }
    }

    /// Amplitude oriented by polarity and min-max scaled to [0, 1] over the
    /// batch. A batch of identical amplitudes scores 0.5 everywhere.
    pub fn scores(&self, amplitudes: &[f32]) -> Vec<f64> {
        let sign = match self.polarity {
            Polarity::PositiveAbove => 1.0,
            Polarity::PositiveBelow => -1.0,
        };
        let raw: Vec<f64> = amplitudes.iter().map(|&a| sign * a as f64).collect();
        let (lo, hi) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if hi <= lo {
            return alloc::vec![0.5; raw.len()];
        }
        let span = hi - lo;
        raw.into_iter().map(|v| (v - lo) / span).collect()
    }

    pub fn predict_proba(&self, features: &FeatureMatrix) -> Vec<f64> {
        self.scores(&features.column(0))
    }

    pub(crate) fn validate(&self) -> Result<(), PredictError> {
        if self.threshold.is_finite() {
            Ok(())
        } else {
            Err(PredictError::Malformed("stump threshold is not finite"))
        }
    }
}
