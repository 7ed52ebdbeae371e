//! Perturbation bounds on the DFE vector.
//!
//! With a distance `d` on labels, perturbing the labels moves the DFE vector
//! by at most `sqrt(sum_i d(y_i, y~_i)^2)` in Euclidean norm. If the model is
//! `K`-Lipschitz in its input, perturbing the inputs moves it by at most
//! `K * sqrt(sum_i ||x_i - x~_i||^2)`. Both steps use the triangle
//! inequality of `d`, so only [`Metric::is_distance`] metrics are accepted.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::LabeledDataset;
use crate::matrix::{distance, norm2};
use crate::metric::Metric;
use crate::network::Network;
use crate::{rng, Error, Matrix, Result};

/// Absolute slack on `lhs <= rhs`.
pub const STABILITY_TOLERANCE: f64 = 1e-9;

/// Minimum number of pairs for a sampled Lipschitz estimate.
pub const MIN_LIPSCHITZ_PAIRS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `||DFE - DFE~||_2`.
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `|DFE_i - DFE~_i|` per sample.
    pub detail: Vec<f64>,
    /// Lipschitz constant used for the bound, if any.
    pub lipschitz: Option<f64>,
    /// Set when the constant was sampled rather than supplied; such a bound is
    /// an estimate, not a certificate.
    pub lipschitz_estimated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzConstant {
    Supplied(f64),
    /// Largest difference quotient over `pairs` pairs anchored at dataset
    /// inputs, with partners at Euclidean distance up to `scale`.
    Estimate {
        pairs: usize,
        scale: f64,
        seed: u64,
    },
}

fn require_distance(metric: Metric) -> Result<()> {
    if metric.is_distance() {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "metric '{}' does not satisfy the triangle inequality; the bounds need a distance",
            metric.name()
        )))
    }
}

fn same_shape(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::arg(format!(
            "{what}: shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `sqrt(sum_i d(y_i, y~_i)^2)`.
pub fn label_stability_bound(labels: &Matrix, perturbed: &Matrix, metric: Metric) -> Result<f64> {
    require_distance(metric)?;
    same_shape(labels, perturbed, "label sets")?;
    let sum: f64 = labels
        .row_iter()
        .zip(perturbed.row_iter())
        .map(|(y, t)| {
            let d = metric.loss_unchecked(y, t);
            d * d
        })
        .sum();
    Ok(libm::sqrt(sum))
}

fn report(a: &[f64], b: &[f64], rhs: f64) -> StabilityReport {
    let detail: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    let lhs = norm2(&detail);
    StabilityReport {
        lhs,
        rhs,
        holds: lhs <= rhs + STABILITY_TOLERANCE,
        detail,
        lipschitz: None,
        lipschitz_estimated: false,
    }
}

fn losses(outputs: &Matrix, labels: &Matrix, metric: Metric) -> Vec<f64> {
    outputs
        .row_iter()
        .zip(labels.row_iter())
        .map(|(p, y)| metric.loss_unchecked(p, y))
        .collect()
}

/// Label-perturbation check against arbitrary label matrices.
pub fn verify_label_stability_with(
    outputs: &Matrix,
    labels: &Matrix,
    perturbed_labels: &Matrix,
    metric: Metric,
) -> Result<StabilityReport> {
    same_shape(outputs, labels, "outputs and labels")?;
    let rhs = label_stability_bound(labels, perturbed_labels, metric)?;
    Ok(report(
        &losses(outputs, labels, metric),
        &losses(outputs, perturbed_labels, metric),
        rhs,
    ))
}

/// Compares the DFE of `outputs` on `dataset` with the DFE on the same inputs
/// relabeled by `perturbed_labels`.
pub fn verify_label_stability(
    outputs: &Matrix,
    dataset: &LabeledDataset,
    perturbed_labels: &Matrix,
    metric: Metric,
) -> Result<StabilityReport> {
    verify_label_stability_with(outputs, dataset.targets(), perturbed_labels, metric)
}

/// Largest `||f(x) - f(x')|| / ||x - x'||` over sampled pairs. Anchors `x` are
/// rows of `inputs`; `x' = x + r u` with `u` a uniform random direction and
/// `r` uniform in `(0, scale]`.
pub fn estimate_lipschitz(
    net: &Network,
    inputs: &Matrix,
    pairs: usize,
    scale: f64,
    seed: u64,
) -> Result<f64> {
    if pairs < MIN_LIPSCHITZ_PAIRS {
        return Err(Error::arg(format!(
            "a Lipschitz estimate needs at least {MIN_LIPSCHITZ_PAIRS} pairs, got {pairs}"
        )));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::arg(format!(
            "perturbation scale {scale} must be positive"
        )));
    }
    if inputs.rows() == 0 {
        return Err(Error::arg("no anchor inputs"));
    }
    let d = net.input_dim();
    if inputs.cols() != d {
        return Err(Error::arg(format!(
            "inputs have {} columns, network expects {d}",
            inputs.cols()
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut best: f64 = 0.0;
    let mut dir = alloc::vec![0.0; d];
    let mut other = alloc::vec![0.0; d];
    for _ in 0..pairs {
        let x = inputs.row(rng.random_range(0..inputs.rows()));
        let n = loop {
            for v in dir.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let n = norm2(&dir);
            if n > 0.0 {
                break n;
            }
        };
        let r = scale * (1.0 - rng.random::<f64>());
        for ((o, xi), u) in other.iter_mut().zip(x).zip(&dir) {
            *o = xi + r * u / n;
        }
        let dx = distance(x, &other);
        if dx == 0.0 {
            continue;
        }
        let fy = net.predict(x)?;
        let fo = net.predict(&other)?;
        best = best.max(distance(&fy, &fo) / dx);
    }
    Ok(best)
}

/// Input-perturbation check against an arbitrary label matrix.
pub fn verify_input_stability_with(
    net: &Network,
    inputs: &Matrix,
    labels: &Matrix,
    perturbed_inputs: &Matrix,
    metric: Metric,
    lipschitz: LipschitzConstant,
) -> Result<StabilityReport> {
    require_distance(metric)?;
    same_shape(inputs, perturbed_inputs, "input sets")?;
    let (k, estimated) = match lipschitz {
        LipschitzConstant::Supplied(k) => {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::arg(format!(
                    "Lipschitz constant {k} must be positive"
                )));
            }
            (k, false)
        }
        LipschitzConstant::Estimate { pairs, scale, seed } => {
            (estimate_lipschitz(net, inputs, pairs, scale, seed)?, true)
        }
    };
    let out = net.forward(inputs)?;
    let out_p = net.forward(perturbed_inputs)?;
    same_shape(&out, labels, "outputs and labels")?;
    let dx: f64 = inputs
        .row_iter()
        .zip(perturbed_inputs.row_iter())
        .map(|(a, b)| {
            let d = distance(a, b);
            d * d
        })
        .sum();
    let mut r = report(
        &losses(&out, labels, metric),
        &losses(&out_p, labels, metric),
        k * libm::sqrt(dx),
    );
    r.lipschitz = Some(k);
    r.lipschitz_estimated = estimated;
    Ok(r)
}

/// Compares the DFE of `net` on `dataset` with the DFE on `perturbed_inputs`
/// under the dataset's own targets.
pub fn verify_input_stability(
    net: &Network,
    dataset: &LabeledDataset,
    perturbed_inputs: &Matrix,
    metric: Metric,
    lipschitz: LipschitzConstant,
) -> Result<StabilityReport> {
    verify_input_stability_with(
        net,
        dataset.inputs(),
        dataset.targets(),
        perturbed_inputs,
        metric,
        lipschitz,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_network, Activation, Architecture, DenseLayer};
    use alloc::vec;

    fn col(v: &[f64]) -> Matrix {
        Matrix::from_vec(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn label_bound_values() {
        let y = col(&[1.0, 0.0]);
        assert_eq!(
            label_stability_bound(&y, &y, Metric::Euclidean).unwrap(),
            0.0
        );
        let t = col(&[1.1, -0.1]);
        let b = label_stability_bound(&y, &t, Metric::Euclidean).unwrap();
        assert!((b - libm::sqrt(0.02)).abs() < 1e-12);
        let t3 = col(&[1.3, -0.3]);
        let b3 = label_stability_bound(&y, &t3, Metric::Euclidean).unwrap();
        assert!((b3 - 3.0 * b).abs() < 1e-12);
        assert!(label_stability_bound(&y, &t, Metric::SquaredError).is_err());
        assert!(label_stability_bound(&y, &col(&[1.0]), Metric::Euclidean).is_err());
    }

    #[test]
    fn zero_label_perturbation() {
        let out = col(&[0.3, 0.8]);
        let y = col(&[1.0, 0.0]);
        let r = verify_label_stability_with(&out, &y, &y, Metric::Euclidean).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds);
    }

    #[test]
    fn concentrated_label_perturbation() {
        let out = col(&[0.3, 0.8, 0.1]);
        let y = col(&[1.0, 0.0, 0.5]);
        let t = col(&[1.0, -5.0, 0.5]);
        let r = verify_label_stability_with(&out, &y, &t, Metric::Euclidean).unwrap();
        assert!(r.holds);
        // one-sided perturbation past the prediction: the bound is attained
        assert!((r.lhs - 5.0).abs() < 1e-12 && (r.rhs - 5.0).abs() < 1e-12);
        assert_eq!(r.detail[0], 0.0);
    }

    fn linear(lambda: &[f64]) -> Network {
        let w = Matrix::from_vec(1, lambda.len(), lambda.to_vec()).unwrap();
        Network::new(
            vec![DenseLayer::new(w, vec![0.0], Activation::Identity).unwrap()],
            None,
        )
        .unwrap()
    }

    #[test]
    fn linear_model_with_analytic_constant() {
        let lambda = [0.6, -0.8];
        let net = linear(&lambda);
        let x = Matrix::from_rows(&[[0.1, 0.2], [0.5, 0.5]]).unwrap();
        let xp = Matrix::from_rows(&[[0.4, -0.2], [0.5, 0.5]]).unwrap();
        let y = col(&[-1.0, 1.0]);
        let r = verify_input_stability_with(
            &net,
            &x,
            &y,
            &xp,
            Metric::Euclidean,
            LipschitzConstant::Supplied(1.0),
        )
        .unwrap();
        assert!(r.holds);
        // perturbation parallel to lambda: the bound is attained
        assert!((r.lhs - r.rhs).abs() < 1e-12);
        let r0 = verify_input_stability_with(
            &net,
            &x,
            &y,
            &x,
            Metric::Euclidean,
            LipschitzConstant::Supplied(1.0),
        )
        .unwrap();
        assert_eq!((r0.lhs, r0.rhs), (0.0, 0.0));
        for k in [0.0, -1.0] {
            assert!(verify_input_stability_with(
                &net,
                &x,
                &y,
                &xp,
                Metric::Euclidean,
                LipschitzConstant::Supplied(k)
            )
            .is_err());
        }
    }

    #[test]
    fn estimated_constant_is_flagged() {
        let net = init_network(Architecture::Mlp, &[3, 4, 2], 7).unwrap();
        let x = Matrix::from_rows(&[[0.1, 0.2, 0.3], [0.9, 0.5, 0.0]]).unwrap();
        let xp = Matrix::from_rows(&[[0.11, 0.2, 0.29], [0.9, 0.52, 0.0]]).unwrap();
        let y = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let est = LipschitzConstant::Estimate {
            pairs: 10_000,
            scale: 0.05,
            seed: 3,
        };
        let r = verify_input_stability_with(&net, &x, &y, &xp, Metric::Euclidean, est).unwrap();
        assert!(r.lipschitz_estimated);
        assert!(r.lipschitz.unwrap() > 0.0);
        assert!(r.holds);
        let few = LipschitzConstant::Estimate {
            pairs: 10,
            scale: 0.05,
            seed: 3,
        };
        assert!(verify_input_stability_with(&net, &x, &y, &xp, Metric::Euclidean, few).is_err());
    }

    #[test]
    fn linear_estimate_matches_norm() {
        let net = linear(&[3.0, 4.0]);
        let x = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        let k = estimate_lipschitz(&net, &x, 10_000, 0.1, 1).unwrap();
        assert!(k <= 5.0 + 1e-9 && k > 4.9);
    }
}
