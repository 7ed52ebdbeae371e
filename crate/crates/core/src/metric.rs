//! Per-sample fitting losses.

use alloc::format;

use crate::{Error, Result};

/// Predictions are clipped to `[BCE_CLIP, 1 - BCE_CLIP]` before taking logs.
pub const BCE_CLIP: f64 = 1e-12;

/// The distance-like function `d(prediction, label)` that turns one labeled
/// sample into one fitting criterion.
///
/// All variants are summed over output components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// `sum (p - y)^2`. Averaged over samples this is the mean squared error.
    SquaredError,
    /// `sum ln(1 + exp(-p * y))` with labels in `{-1, 1}`.
    Logistic,
    /// `-sum [y ln p + (1 - y) ln(1 - p)]` with clipped predictions.
    BinaryCrossEntropy,
    /// `||p - y||_2`. The only variant satisfying the triangle inequality,
    /// hence the one the perturbation bounds are stated for.
    Euclidean,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::SquaredError,
        Metric::Logistic,
        Metric::BinaryCrossEntropy,
        Metric::Euclidean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::SquaredError => "squared-error",
            Metric::Logistic => "logistic",
            Metric::BinaryCrossEntropy => "binary-cross-entropy",
            Metric::Euclidean => "euclidean",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Whether `d` is a metric in the mathematical sense.
    pub fn is_distance(self) -> bool {
        matches!(self, Metric::Euclidean)
    }

    /// Loss of one sample. Dimensions must match.
    pub fn loss(self, prediction: &[f64], label: &[f64]) -> Result<f64> {
        if prediction.len() != label.len() {
            return Err(Error::arg(format!(
                "prediction has {} components, label has {}",
                prediction.len(),
                label.len()
            )));
        }
        Ok(self.loss_unchecked(prediction, label))
    }

    pub(crate) fn loss_unchecked(self, p: &[f64], y: &[f64]) -> f64 {
        let pairs = p.iter().zip(y);
        match self {
            Metric::SquaredError => pairs.map(|(p, y)| (p - y) * (p - y)).sum(),
            Metric::Logistic => pairs.map(|(p, y)| softplus(-p * y)).sum(),
            Metric::BinaryCrossEntropy => pairs
                .map(|(p, y)| {
                    let p = p.clamp(BCE_CLIP, 1.0 - BCE_CLIP);
                    -(y * libm::log(p) + (1.0 - y) * libm::log(1.0 - p))
                })
                .sum(),
            Metric::Euclidean => crate::matrix::distance(p, y),
        }
    }

    /// Gradient of the loss with respect to the prediction, written to `out`.
    pub fn gradient(self, p: &[f64], y: &[f64], out: &mut [f64]) {
        debug_assert!(p.len() == y.len() && p.len() == out.len());
        match self {
            Metric::SquaredError => {
                for ((g, p), y) in out.iter_mut().zip(p).zip(y) {
                    *g = 2.0 * (p - y);
                }
            }
            Metric::Logistic => {
                for ((g, p), y) in out.iter_mut().zip(p).zip(y) {
                    *g = -y * sigmoid(-p * y);
                }
            }
            Metric::BinaryCrossEntropy => {
                for ((g, &p), y) in out.iter_mut().zip(p).zip(y) {
                    *g = if (BCE_CLIP..=1.0 - BCE_CLIP).contains(&p) {
                        -y / p + (1.0 - y) / (1.0 - p)
                    } else {
                        0.0
                    };
                }
            }
            Metric::Euclidean => {
                let d = crate::matrix::distance(p, y);
                for ((g, p), y) in out.iter_mut().zip(p).zip(y) {
                    *g = if d > 0.0 { (p - y) / d } else { 0.0 };
                }
            }
        }
    }
}

/// `d(prediction, label)` for one sample.
pub fn per_sample_loss(metric: Metric, prediction: &[f64], label: &[f64]) -> Result<f64> {
    metric.loss(prediction, label)
}
