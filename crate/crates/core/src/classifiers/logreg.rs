use alloc::vec::Vec;

use super::{check_labels, PredictError, TrainConfig, TrainError};
use crate::dataset::LabeledDataset;
use crate::features::{FeatureMatrix, N_FEATURES};

/// Linear model on z-scored features.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Per-feature training mean.
    pub means: Vec<f64>,
    /// Per-feature training standard deviation (1 for constant features).
    pub scales: Vec<f64>,
}

/// A trained model plus its optimization trace.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegFit {
    pub model: LogRegModel,
    /// Loss before the first step, then after every accepted step.
    pub losses: Vec<f64>,
    pub converged: bool,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
}

struct Standardized {
    x: Vec<f64>,
    y: Vec<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
}

fn standardize(features: &FeatureMatrix, labels: &[u8]) -> Standardized {
    let n = features.n_samples();
    let mut means = alloc::vec![0.0; N_FEATURES];
    for row in features.rows() {
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v as f64;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut vars = alloc::vec![0.0; N_FEATURES];
    for row in features.rows() {
        for ((s, &v), m) in vars.iter_mut().zip(row).zip(&means) {
            let d = v as f64 - m;
            *s += d * d;
        }
    }
    let scales: Vec<f64> = vars
        .iter()
        .map(|v| {
            let sd = libm::sqrt(v / n as f64);
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();

    let mut x = Vec::with_capacity(n * N_FEATURES);
    for row in features.rows() {
        for j in 0..N_FEATURES {
            x.push((row[j] as f64 - means[j]) / scales[j]);
        }
    }
    let y = labels.iter().map(|&l| l as f64).collect();
    Standardized {
        x,
        y,
        means,
        scales,
    }
}

/// Regularized mean log-loss and its gradient (weights then bias).
fn loss_and_grad(data: &Standardized, w: &[f64], b: f64, l2: f64, grad: &mut [f64]) -> f64 {
    let n = data.y.len() as f64;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (row, &y) in data.x.chunks_exact(N_FEATURES).zip(&data.y) {
        let z = b + row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>();
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, x) in grad[..N_FEATURES].iter_mut().zip(row) {
            *g += r * x;
        }
        grad[N_FEATURES] += r;
    }
    for g in grad.iter_mut() {
        *g /= n;
    }
    let mut penalty = 0.0;
    for (g, w) in grad[..N_FEATURES].iter_mut().zip(w) {
        *g += l2 * w;
        penalty += w * w;
    }
    loss / n + 0.5 * l2 * penalty
}

fn loss_only(data: &Standardized, w: &[f64], b: f64, l2: f64) -> f64 {
    let n = data.y.len() as f64;
    let mut loss = 0.0;
    for (row, &y) in data.x.chunks_exact(N_FEATURES).zip(&data.y) {
        let z = b + row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>();
        loss += softplus(z) - y * z;
    }
    loss / n + 0.5 * l2 * w.iter().map(|w| w * w).sum::<f64>()
}

/// Batch gradient descent with step halving: a step that would raise the
/// loss is rejected and retried at half the rate, so the recorded loss
/// never increases.
pub fn fit_logreg(data: &LabeledDataset, config: &TrainConfig) -> Result<LogRegFit, TrainError> {
    config.validate()?;
    check_labels(data.n_samples(), data.labels())?;
    let std = standardize(data.features(), data.labels());

    let mut w = alloc::vec![0.0; N_FEATURES];
    let mut b = 0.0;
    let mut grad = alloc::vec![0.0; N_FEATURES + 1];
    let mut loss = loss_and_grad(&std, &w, b, config.l2, &mut grad);
    if !loss.is_finite() {
        return Err(TrainError::NonFiniteLoss { epoch: 0 });
    }
    let mut losses = alloc::vec![loss];
    let mut converged = false;
    let mut trial_w = alloc::vec![0.0; N_FEATURES];

    for epoch in 1..=config.epochs {
        let max_grad = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if max_grad < config.tolerance {
            converged = true;
            break;
        }
        let mut rate = config.learning_rate;
        let accepted = loop {
            for ((t, w), g) in trial_w.iter_mut().zip(&w).zip(&grad) {
                *t = w - rate * g;
            }
            let trial_b = b - rate * grad[N_FEATURES];
            let trial_loss = loss_only(&std, &trial_w, trial_b, config.l2);
            if !trial_loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch });
            }
            if trial_loss <= loss {
                break Some(trial_b);
            }
            rate *= 0.5;
            if rate < config.learning_rate * 1e-12 {
                break None;
            }
        };
        let Some(new_b) = accepted else {
            // no descent direction left at machine precision
            converged = true;
            break;
        };
        w.copy_from_slice(&trial_w);
        b = new_b;
        loss = loss_and_grad(&std, &w, b, config.l2, &mut grad);
        losses.push(loss);
    }

    Ok(LogRegFit {
        model: LogRegModel {
            weights: w,
            bias: b,
            means: std.means,
            scales: std.scales,
        },
        losses,
        converged,
    })
}

pub fn train_logreg(data: &LabeledDataset, config: &TrainConfig) -> Result<LogRegModel, TrainError> {
    fit_logreg(data, config).map(|f| f.model)
}

impl LogRegModel {
    /// Linear response before the sigmoid.
    pub fn decision(&self, row: &[f32]) -> f64 {
        self.bias
            + row
                .iter()
                .zip(&self.weights)
                .zip(self.means.iter().zip(&self.scales))
                .map(|((&x, w), (m, s))| w * (x as f64 - m) / s)
                .sum::<f64>()
    }

    pub fn predict_proba(&self, features: &FeatureMatrix) -> Result<Vec<f64>, PredictError> {
        self.validate()?;
        if self.weights.len() != features.n_features() {
            return Err(PredictError::FeatureCount {
                expected: self.weights.len(),
                actual: features.n_features(),
            });
        }
        Ok(features.rows().map(|r| sigmoid(self.decision(r))).collect())
    }

    pub(crate) fn validate(&self) -> Result<(), PredictError> {
        if self.weights.len() != N_FEATURES {
            return Err(PredictError::FeatureCount {
                expected: self.weights.len(),
                actual: N_FEATURES,
            });
        }
        if self.means.len() != N_FEATURES || self.scales.len() != N_FEATURES {
            return Err(PredictError::Malformed("standardization length is not 42"));
        }
        if self.scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(PredictError::Malformed("feature scales must be positive"));
        }
        let finite = self.bias.is_finite()
            && self.weights.iter().all(|w| w.is_finite())
            && self.means.iter().all(|m| m.is_finite());
        if !finite {
            return Err(PredictError::Malformed("non-finite parameter"));
        }
        Ok(())
    }
}
