//! Seeded minibatch SGD on the multi-dataset scalarized loss.
//!
//! Every epoch shuffles each dataset with its own derived seed. An epoch has
//! `ceil(min_i s_i / batch_size)` steps; step `t` takes rows
//! `[t s_i / steps, (t + 1) s_i / steps)` of shuffled dataset `i`, so all
//! datasets are traversed exactly once per epoch in aligned fractions and the
//! weights enter only through the loss.

use alloc::format;
use alloc::vec::Vec;

use crate::backprop::{loss_and_grad, scalarized_loss, Batch};
use crate::dataset::{permutation, LabeledDataset};
use crate::dfe::{dfe_vector, ScalarizationWeights};
use crate::metric::Metric;
use crate::network::{Architecture, Network};
use crate::{rng, Error, Matrix, Result};

pub const DEFAULT_EPOCHS: usize = 30;
pub const DEFAULT_BATCH_SIZE: usize = 10;

/// Default learning rate per architecture.
pub fn default_learning_rate(arch: Architecture) -> f64 {
    match arch {
        Architecture::Mlp => 0.3,
        Architecture::Residual => 0.05,
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig<'a> {
    pub datasets: &'a [LabeledDataset],
    pub metric: Metric,
    pub weights: ScalarizationWeights,
    pub epochs: usize,
    /// Rows drawn from the smallest dataset per step.
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
    /// Clamp every parameter to `[-b, b]` after each update.
    pub param_box: Option<f64>,
}

impl TrainConfig<'_> {
    pub fn validate(&self, net: &Network) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::arg("no training datasets"));
        }
        if self.datasets.len() != self.weights.len() {
            return Err(Error::arg(format!(
                "{} datasets but {} weights",
                self.datasets.len(),
                self.weights.len()
            )));
        }
        if self.epochs == 0 {
            return Err(Error::arg("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::arg("batch size must be at least 1"));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::arg(format!(
                "learning rate {} must be nonnegative and finite",
                self.learning_rate
            )));
        }
        if let Some(b) = self.param_box {
            if !(b > 0.0) {
                return Err(Error::arg(format!("parameter box {b} must be positive")));
            }
        }
        for d in self.datasets {
            if d.is_empty() {
                return Err(Error::arg(format!("dataset '{}' is empty", d.name())));
            }
            if d.input_dim() != net.input_dim() || d.classes() != net.output_dim() {
                return Err(Error::arg(format!(
                    "dataset '{}' is {}->{} but the network is {}->{}",
                    d.name(),
                    d.input_dim(),
                    d.classes(),
                    net.input_dim(),
                    net.output_dim()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    /// Scalarized loss on the full datasets before training.
    pub initial_loss: f64,
    /// Mean DFE of each dataset before training.
    pub initial_dfe_means: Vec<f64>,
    /// Scalarized loss on the full datasets after each epoch.
    pub epoch_loss: Vec<f64>,
    /// Mean DFE of each dataset after each epoch.
    pub epoch_dfe_means: Vec<Vec<f64>>,
    /// Accuracy on each dataset after the last epoch.
    pub final_accuracy: Vec<f64>,
}

fn dfe_means(net: &Network, config: &TrainConfig<'_>) -> Result<Vec<f64>> {
    config
        .datasets
        .iter()
        .map(|d| dfe_vector(&net.forward(d.inputs())?, d, config.metric)?.mean())
        .collect()
}

fn full_loss(net: &Network, config: &TrainConfig<'_>) -> Result<f64> {
    let batches: Vec<Batch<'_>> = config.datasets.iter().map(Batch::of).collect();
    scalarized_loss(net, &batches, config.metric, &config.weights)
}

/// Trains `net` and returns it with its history.
pub fn sgd_train(net: Network, config: &TrainConfig<'_>) -> Result<(Network, TrainHistory)> {
    config.validate(&net)?;
    let mut net = net;
    let m = config.datasets.len();
    let sizes: Vec<usize> = config.datasets.iter().map(LabeledDataset::len).collect();
    let smallest = sizes.iter().copied().min().unwrap_or(0);
    let steps = smallest.div_ceil(config.batch_size);

    let initial_loss = full_loss(&net, config)?;
    let initial_dfe_means = dfe_means(&net, config)?;
    let mut epoch_loss = Vec::with_capacity(config.epochs);
    let mut epoch_dfe_means = Vec::with_capacity(config.epochs);
    let mut xs: Vec<Matrix> = Vec::with_capacity(m);
    let mut ys: Vec<Matrix> = Vec::with_capacity(m);

    for epoch in 0..config.epochs {
        let epoch_seed = rng::derive_seed(config.seed, epoch as u64);
        let perms: Vec<Vec<usize>> = (0..m)
            .map(|i| permutation(sizes[i], rng::derive_seed(epoch_seed, i as u64)))
            .collect();
        for t in 0..steps {
            xs.clear();
            ys.clear();
            for (i, d) in config.datasets.iter().enumerate() {
                let rows = &perms[i][t * sizes[i] / steps..(t + 1) * sizes[i] / steps];
                xs.push(d.inputs().select_rows(rows));
                ys.push(d.targets().select_rows(rows));
            }
            let batches: Vec<Batch<'_>> =
                xs.iter().zip(&ys).map(|(x, y)| Batch::new(x, y)).collect();
            let (loss, grad) = loss_and_grad(&net, &batches, config.metric, &config.weights)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch, batch: t });
            }
            net.descend(&grad, config.learning_rate, config.param_box);
        }
        let loss = full_loss(&net, config)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                batch: steps,
            });
        }
        epoch_loss.push(loss);
        epoch_dfe_means.push(dfe_means(&net, config)?);
    }
    let final_accuracy = config
        .datasets
        .iter()
        .map(|d| accuracy(&net, d))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        net,
        TrainHistory {
            initial_loss,
            initial_dfe_means,
            epoch_loss,
            epoch_dfe_means,
            final_accuracy,
        },
    ))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Fraction of rows whose output argmax equals the target argmax.
pub fn accuracy_of_outputs(outputs: &Matrix, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::arg(format!("dataset '{}' is empty", data.name())));
    }
    if outputs.shape() != data.targets().shape() {
        return Err(Error::arg(format!(
            "outputs are {:?} but targets are {:?}",
            outputs.shape(),
            data.targets().shape()
        )));
    }
    let hits = outputs
        .row_iter()
        .zip(data.targets().row_iter())
        .filter(|(p, y)| argmax(p) == argmax(y))
        .count();
    Ok(hits as f64 / data.len() as f64)
}

pub fn accuracy(net: &Network, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::arg(format!("dataset '{}' is empty", data.name())));
    }
    accuracy_of_outputs(&net.forward(data.inputs())?, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_network, Activation, DenseLayer};
    use alloc::vec;
    use rand::Rng as _;

    /// Two Gaussian-free blobs in `[0,1]^2`, separable by `x0 + x1 = 1`.
    fn toy(n: usize, seed: u64, name: &str) -> LabeledDataset {
        let mut r = rng::seeded(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let (lo, hi) = if c == 0 { (0.0, 0.4) } else { (0.6, 1.0) };
            rows.push([r.random_range(lo..hi), r.random_range(lo..hi)]);
            labels.push(c);
        }
        LabeledDataset::from_labels(name, Matrix::from_rows(&rows).unwrap(), &labels, 2).unwrap()
    }

    fn config(data: &[LabeledDataset], lr: f64) -> TrainConfig<'_> {
        TrainConfig {
            datasets: data,
            metric: Metric::BinaryCrossEntropy,
            weights: ScalarizationWeights::uniform(data.len()).unwrap(),
            epochs: 1,
            batch_size: 4,
            learning_rate: lr,
            seed: 5,
            param_box: None,
        }
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let data = [toy(20, 1, "a")];
        let net = init_network(Architecture::Mlp, &[2, 3, 2], 0).unwrap();
        let (out, h) = sgd_train(net.clone(), &config(&data, 0.0)).unwrap();
        assert_eq!(out, net);
        assert_eq!(h.epoch_loss[0], h.initial_loss);
    }

    #[test]
    fn one_epoch_reduces_loss() {
        let data = [toy(20, 2, "a")];
        let net = init_network(Architecture::Mlp, &[2, 3, 2], 1).unwrap();
        let (_, h) = sgd_train(net, &config(&data, 0.5)).unwrap();
        assert!(h.epoch_loss[0] < h.initial_loss);
    }

    #[test]
    fn deterministic() {
        let data = [toy(30, 3, "a"), toy(21, 4, "b"), toy(25, 5, "c")];
        let mut c = config(&data, 0.3);
        c.epochs = 3;
        let net = init_network(Architecture::Residual, &[2, 4, 4, 2], 2).unwrap();
        let a = sgd_train(net.clone(), &c).unwrap();
        let b = sgd_train(net, &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.epoch_loss.len(), 3);
        assert_eq!(a.1.epoch_dfe_means.len(), 3);
        assert_eq!(a.1.final_accuracy.len(), 3);
    }

    #[test]
    fn learns_separable_toy() {
        let data = [toy(40, 6, "a"), toy(40, 7, "b")];
        let mut c = config(&data, 1.0);
        c.epochs = 60;
        let net = init_network(Architecture::Mlp, &[2, 4, 2], 3).unwrap();
        let (net, h) = sgd_train(net, &c).unwrap();
        assert!(
            h.final_accuracy.iter().all(|&a| a == 1.0),
            "{:?}",
            h.final_accuracy
        );
        assert_eq!(accuracy(&net, &data[0]).unwrap(), 1.0);
    }

    #[test]
    fn param_box_is_respected() {
        let data = [toy(20, 8, "a")];
        let mut c = config(&data, 5.0);
        c.param_box = Some(0.2);
        c.epochs = 3;
        let net = init_network(Architecture::Mlp, &[2, 3, 2], 4).unwrap();
        let (net, _) = sgd_train(net, &c).unwrap();
        assert!(net.params().iter().all(|p| p.abs() <= 0.2));
    }

    #[test]
    fn diverging_training_reports_coordinates() {
        // identity output with squared error and a huge step diverges
        let data = [toy(20, 9, "a")];
        let layer = DenseLayer::zeros(2, 2, Activation::Identity).unwrap();
        let net = Network::new(vec![layer], None).unwrap();
        let mut c = config(&data, 1e6);
        c.metric = Metric::SquaredError;
        c.epochs = 50;
        let err = sgd_train(net, &c).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { .. }), "{err:?}");
    }

    #[test]
    fn linear_squared_error_descends() {
        let data = [toy(16, 10, "a")];
        let layer = DenseLayer::zeros(2, 2, Activation::Identity).unwrap();
        let mut net = Network::new(vec![layer], None).unwrap();
        let w = ScalarizationWeights::uniform(1).unwrap();
        let batch = [Batch::of(&data[0])];
        let mut prev = f64::INFINITY;
        for _ in 0..200 {
            let (loss, grad) = loss_and_grad(&net, &batch, Metric::SquaredError, &w).unwrap();
            let norm: f64 = grad.iter().map(|g| g * g).sum::<f64>();
            if norm.sqrt() < 1e-8 {
                break;
            }
            assert!(loss < prev);
            prev = loss;
            net.descend(&grad, 0.05, None);
        }
    }

    #[test]
    fn accuracy_rules() {
        let data = toy(10, 11, "a");
        assert_eq!(accuracy_of_outputs(data.targets(), &data).unwrap(), 1.0);
        let mut flat = Matrix::zeros(10, 2);
        flat.as_mut_slice().fill(0.1);
        let zeros = data.labels().iter().filter(|&&l| l == 0).count();
        assert_eq!(
            accuracy_of_outputs(&flat, &data).unwrap(),
            zeros as f64 / 10.0
        );
        let empty = data.select(&[]);
        let net = init_network(Architecture::Mlp, &[2, 3, 2], 0).unwrap();
        assert!(accuracy(&net, &empty).is_err());
        assert_eq!(argmax(&[0.2, 0.7, 0.7]), 1);
    }

    #[test]
    fn config_validation() {
        let data = [toy(10, 1, "a")];
        let net = init_network(Architecture::Mlp, &[2, 3, 2], 0).unwrap();
        let mut c = config(&data, 0.1);
        c.epochs = 0;
        assert!(sgd_train(net.clone(), &c).is_err());
        let mut c = config(&data, 0.1);
        c.learning_rate = -1.0;
        assert!(sgd_train(net.clone(), &c).is_err());
        let wide = init_network(Architecture::Mlp, &[3, 3, 2], 0).unwrap();
        assert!(sgd_train(wide, &config(&data, 0.1)).is_err());
    }
}
