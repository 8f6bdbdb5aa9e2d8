//! Precision/recall, precision-recall curves and classifier response maps.

use alloc::vec::Vec;

use crate::classifiers::{Model, PredictError};
use crate::features::{extract_descriptor, FeatureMatrixError, FeaturePlane};
use crate::image::{EventImage, LabelMask, NOISE, TRACK};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("{scores} scores for {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("no positive samples to compute recall against")]
    NoPositives,
    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),
    #[error(transparent)]
    Features(#[from] FeatureMatrixError),
    #[error(transparent)]
    Predict(#[from] PredictError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    /// Counts for the rule "positive when `score >= threshold`".
    pub fn at_threshold(scores: &[f64], labels: &[u8], threshold: f64) -> Self {
        let mut c = ConfusionCounts::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l == TRACK) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Precision and recall, with flags for the 0/0 cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    /// Nothing was predicted positive; precision reported as 1.
    pub degenerate_precision: bool,
    /// No positives exist; recall reported as 1.
    pub degenerate_recall: bool,
}

/// `TP / (TP + FP)` and `TP / (TP + FN)`.
pub fn precision_recall(counts: &ConfusionCounts) -> PrecisionRecall {
    let predicted = counts.tp + counts.fp;
    let actual = counts.tp + counts.fn_;
    PrecisionRecall {
        precision: if predicted == 0 {
            1.0
        } else {
            counts.tp as f64 / predicted as f64
        },
        recall: if actual == 0 {
            1.0
        } else {
            counts.tp as f64 / actual as f64
        },
        degenerate_precision: predicted == 0,
        degenerate_recall: actual == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: u64,
    pub fp: u64,
}

/// One point per distinct score, ordered by increasing threshold (so recall
/// is non-increasing along the list).
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    /// Area under precision over recall by the trapezoid rule, starting from
    /// the empty-prediction point (recall 0, precision 1).
    pub auc: f64,
    pub positives: u64,
    pub negatives: u64,
}

impl PrCurve {
    pub fn prevalence(&self) -> f64 {
        self.positives as f64 / (self.positives + self.negatives) as f64
    }
}

/// Sweeps every distinct score as a `>=` threshold in one descending pass.
pub fn pr_curve(scores: &[f64], labels: &[u8]) -> Result<PrCurve, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore(i));
    }
    let positives = labels.iter().filter(|&&l| l == TRACK).count() as u64;
    if positives == 0 {
        return Err(EvalError::NoPositives);
    }
    let negatives = labels.len() as u64 - positives;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == TRACK {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let pr = precision_recall(&ConfusionCounts {
            tp,
            fp,
            fn_: positives - tp,
            tn: negatives - fp,
        });
        points.push(PrPoint {
            threshold,
            precision: pr.precision,
            recall: pr.recall,
            tp,
            fp,
        });
    }

    let mut auc = 0.0;
    let (mut prev_r, mut prev_p) = (0.0, 1.0);
    for p in &points {
        auc += (p.recall - prev_r) * 0.5 * (p.precision + prev_p);
        prev_r = p.recall;
        prev_p = p.precision;
    }
    points.reverse();

    Ok(PrCurve {
        points,
        auc,
        positives,
        negatives,
    })
}

/// Per-pixel track probability of `model` on `image`.
pub fn response_map(model: &Model, image: &EventImage) -> Result<FeaturePlane, EvalError> {
    let features = extract_descriptor(image)?;
    let probs = model.predict_proba(&features)?;
    Ok(FeaturePlane::new(image.width(), image.height(), probs))
}

/// Track wherever the probability is at least `threshold`.
pub fn threshold_mask(map: &FeaturePlane, threshold: f64) -> LabelMask {
    let labels = map
        .values
        .iter()
        .map(|&p| if p >= threshold { TRACK } else { NOISE })
        .collect();
    LabelMask::new(map.width, map.height, labels).expect("plane dimensions are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn eight_two_two() {
        let pr = precision_recall(&ConfusionCounts {
            tp: 8,
            fp: 2,
            fn_: 2,
            tn: 0,
        });
        assert_eq!((pr.precision, pr.recall), (0.8, 0.8));
        assert!(!pr.degenerate_precision && !pr.degenerate_recall);
    }

    #[test]
    fn degenerate_conventions() {
        let pr = precision_recall(&ConfusionCounts {
            tp: 0,
            fp: 0,
            fn_: 3,
            tn: 5,
        });
        assert_eq!(pr.precision, 1.0);
        assert_eq!(pr.recall, 0.0);
        assert!(pr.degenerate_precision);
        let pr = precision_recall(&ConfusionCounts {
            tp: 0,
            fp: 4,
            fn_: 0,
            tn: 1,
        });
        assert_eq!((pr.precision, pr.recall), (0.0, 1.0));
        assert!(pr.degenerate_recall);
    }

    #[test]
    fn perfect_and_constant_scorers() {
        let c = pr_curve(&[0.9, 0.8, 0.1, 0.2], &[1, 1, 0, 0]).unwrap();
        assert_eq!(c.auc, 1.0);
        assert!(c.points.iter().any(|p| p.precision == 1.0 && p.recall == 1.0));

        let c = pr_curve(&[0.3; 5], &[1, 0, 0, 1, 0]).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0].recall, 1.0);
        assert_eq!(c.points[0].precision, 0.4);
    }

    #[test]
    fn curve_errors() {
        assert_eq!(pr_curve(&[0.1], &[0]), Err(EvalError::NoPositives));
        assert!(matches!(
            pr_curve(&[0.1, 0.2], &[1]),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert_eq!(
            pr_curve(&[0.1, f64::NAN], &[1, 0]),
            Err(EvalError::NonFiniteScore(1))
        );
    }

    #[test]
    fn threshold_mask_extremes() {
        let map = FeaturePlane::new(3, 1, vec![0.0, 0.4, 1.0]);
        assert_eq!(threshold_mask(&map, 0.0).labels(), &[1, 1, 1]);
        assert_eq!(threshold_mask(&map, 1.5).labels(), &[0, 0, 0]);
        assert_eq!(threshold_mask(&map, 0.5).labels(), &[0, 0, 1]);
    }
}
