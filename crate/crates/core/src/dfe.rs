//! The data-fitting-error vector and its linear scalarizations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::LabeledDataset;
use crate::metric::Metric;
use crate::{Error, Matrix, Result};

/// Tolerance on `sum(betas) == 1` accepted by [`ScalarizationWeights::new`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// One nonnegative fitting criterion per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DfeVector {
    values: Vec<f64>,
    dataset_name: String,
}

impl DfeVector {
    pub fn new(values: Vec<f64>, dataset_name: impl Into<String>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidData(format!(
                "DFE entry {v} is not nonnegative"
            )));
        }
        Ok(Self {
            values,
            dataset_name: dataset_name.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dataset_name(&self) -> &str {
        &self.dataset_name
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean entry, i.e. the scalarization with uniform weights `1/N`.
    pub fn mean(&self) -> Result<f64> {
        if self.values.is_empty() {
            return Err(Error::arg(format!(
                "DFE vector of '{}' is empty",
                self.dataset_name
            )));
        }
        Ok(self.values.iter().sum::<f64>() / self.values.len() as f64)
    }
}

/// Per-dataset weights of a multi-dataset scalarization.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizationWeights {
    betas: Vec<f64>,
}

impl ScalarizationWeights {
    /// Nonnegative weights summing to one (within [`WEIGHT_SUM_TOLERANCE`]).
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        let w = Self::unnormalized(betas)?;
        let sum: f64 = w.betas.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::arg(format!("weights sum to {sum}, expected 1")));
        }
        Ok(w)
    }

    /// Nonnegative weights without the sum constraint. Scalarized losses are
    /// linear in the weights, which is what this constructor is for.
    pub fn unnormalized(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::arg("at least one weight is required"));
        }
        if let Some((i, b)) = betas
            .iter()
            .enumerate()
            .find(|(_, b)| !(**b >= 0.0) || !b.is_finite())
        {
            return Err(Error::arg(format!(
                "weight {} is {b}; weights must be nonnegative (positive weights are \
                 required for properly efficient solutions)",
                i + 1
            )));
        }
        Ok(Self { betas })
    }

    /// Equal weights `1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        epsilon_weights(m, 0.0)
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// Whether every weight is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.betas.iter().all(|&b| b > 0.0)
    }
}

/// Per-sample losses of `model_outputs` against the dataset targets.
pub fn dfe_vector(
    model_outputs: &Matrix,
    dataset: &LabeledDataset,
    metric: Metric,
) -> Result<DfeVector> {
    dfe_against(model_outputs, dataset.targets(), metric, dataset.name())
}

/// Per-sample losses against an arbitrary label matrix.
pub fn dfe_against(
    outputs: &Matrix,
    labels: &Matrix,
    metric: Metric,
    name: &str,
) -> Result<DfeVector> {
    if outputs.shape() != labels.shape() {
        return Err(Error::arg(format!(
            "outputs are {:?} but labels are {:?}",
            outputs.shape(),
            labels.shape()
        )));
    }
    let values = outputs
        .row_iter()
        .zip(labels.row_iter())
        .map(|(p, y)| metric.loss_unchecked(p, y))
        .collect();
    DfeVector::new(values, name)
}

/// `sum_i beta_i * mean(dfe_i)`: uniform weights inside each dataset,
/// `weights` across datasets.
pub fn scalarize(dfe_vectors: &[DfeVector], weights: &ScalarizationWeights) -> Result<f64> {
    if dfe_vectors.len() != weights.len() {
        return Err(Error::arg(format!(
            "{} DFE vectors but {} weights",
            dfe_vectors.len(),
            weights.len()
        )));
    }
    let mut total = 0.0;
    for (dfe, beta) in dfe_vectors.iter().zip(weights.betas()) {
        total += beta * dfe.mean()?;
    }
    Ok(total)
}

/// Weights `(1/m + eps, 1/m - eps/(m-1), ..., 1/m - eps/(m-1))`.
///
/// For `m = 3` this is `(1/3 + eps, 1/3 - eps/2, 1/3 - eps/2)`; `eps = 0` gives
/// uniform weights. The first weight absorbs rounding so that the left-to-right
/// `f64` sum of the result is exactly `1.0`.
pub fn epsilon_weights(m: usize, epsilon: f64) -> Result<ScalarizationWeights> {
    if m == 0 {
        return Err(Error::arg("at least one dataset is required"));
    }
    if !epsilon.is_finite() {
        return Err(Error::arg(format!("epsilon {epsilon} is not finite")));
    }
    if m == 1 {
        if epsilon != 0.0 {
            return Err(Error::arg("a single dataset admits only epsilon = 0"));
        }
        return ScalarizationWeights::new(alloc::vec![1.0]);
    }
    let base = 1.0 / m as f64;
    let rest = base - epsilon / (m - 1) as f64;
    let first = base + epsilon;
    if rest < 0.0 || first < 0.0 {
        let (which, value) = if first < 0.0 { (1, first) } else { (2, rest) };
        return Err(Error::arg(format!(
            "epsilon {epsilon} makes weight {which} negative ({value}); weights must be \
             nonnegative (positive weights are required for properly efficient solutions)"
        )));
    }
    let mut betas = alloc::vec![rest; m];
    betas[0] = first;
    // Nudge the first weight until the sequential sum is exactly one.
    for _ in 0..64 {
        let sum: f64 = betas.iter().sum();
        if sum == 1.0 {
            break;
        }
        betas[0] += 1.0 - sum;
    }
    if betas[0] < 0.0 {
        return Err(Error::arg(format!(
            "epsilon {epsilon} makes weight 1 negative"
        )));
    }
    ScalarizationWeights::new(betas)
}
