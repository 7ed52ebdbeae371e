//! Exact gradients of the multi-dataset scalarized loss
//! `sum_i beta_i mean_j d(f(x_ij), y_ij)` with respect to the flat parameter
//! vector of a [`Network`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dfe::ScalarizationWeights;
use crate::metric::Metric;
use crate::network::{Network, ShortcutPlacement, Trace};
use crate::{Error, Matrix, Result};

/// Inputs and targets of one dataset's minibatch.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub inputs: &'a Matrix,
    pub targets: &'a Matrix,
}

impl<'a> Batch<'a> {
    pub fn new(inputs: &'a Matrix, targets: &'a Matrix) -> Self {
        Self { inputs, targets }
    }

    pub fn of(data: &'a crate::dataset::LabeledDataset) -> Self {
        Self::new(data.inputs(), data.targets())
    }
}

fn check(net: &Network, batches: &[Batch<'_>], weights: &ScalarizationWeights) -> Result<()> {
    if batches.len() != weights.len() {
        return Err(Error::arg(format!(
            "{} batches but {} weights",
            batches.len(),
            weights.len()
        )));
    }
    for (i, b) in batches.iter().enumerate() {
        if b.inputs.rows() == 0 {
            return Err(Error::arg(format!("batch {i} is empty")));
        }
        if b.inputs.rows() != b.targets.rows() {
            return Err(Error::arg(format!(
                "batch {i}: {} inputs but {} targets",
                b.inputs.rows(),
                b.targets.rows()
            )));
        }
        if b.inputs.cols() != net.input_dim() || b.targets.cols() != net.output_dim() {
            return Err(Error::arg(format!(
                "batch {i} is {}->{} but the network is {}->{}",
                b.inputs.cols(),
                b.targets.cols(),
                net.input_dim(),
                net.output_dim()
            )));
        }
    }
    Ok(())
}

/// Scalarized loss without the gradient.
pub fn scalarized_loss(
    net: &Network,
    batches: &[Batch<'_>],
    metric: Metric,
    weights: &ScalarizationWeights,
) -> Result<f64> {
    check(net, batches, weights)?;
    let mut trace = Trace::new(net);
    let mut total = 0.0;
    for (b, &beta) in batches.iter().zip(weights.betas()) {
        let mut sum = 0.0;
        for (x, y) in b.inputs.row_iter().zip(b.targets.row_iter()) {
            net.forward_into(x, &mut trace);
            sum += metric.loss_unchecked(trace.output(), y);
        }
        total += beta * sum / b.inputs.rows() as f64;
    }
    Ok(total)
}

/// Offsets of each layer's weights in the flat parameter vector.
fn layer_offsets(net: &Network) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(net.layers().len());
    let mut at = 0;
    for l in net.layers() {
        offsets.push(at);
        at += l.weights().as_slice().len() + l.bias().len();
    }
    offsets
}

/// Loss and its gradient over the flat parameter vector (see
/// [`Network::params`]).
pub fn loss_and_grad(
    net: &Network,
    batches: &[Batch<'_>],
    metric: Metric,
    weights: &ScalarizationWeights,
) -> Result<(f64, Vec<f64>)> {
    check(net, batches, weights)?;
    let layers = net.layers();
    let offsets = layer_offsets(net);
    let shortcut = net.shortcut();
    let widest = layers
        .iter()
        .map(|l| l.out_dim().max(l.in_dim()))
        .max()
        .unwrap_or(0);

    let mut grad = vec![0.0; net.param_count()];
    let mut trace = Trace::new(net);
    let mut upstream = vec![0.0; widest];
    let mut dz = vec![0.0; widest];
    let mut skip = vec![0.0; widest];
    let mut total = 0.0;

    for (b, &beta) in batches.iter().zip(weights.betas()) {
        let scale = beta / b.inputs.rows() as f64;
        let mut sum = 0.0;
        for (x, y) in b.inputs.row_iter().zip(b.targets.row_iter()) {
            net.forward_into(x, &mut trace);
            let out = trace.output();
            sum += metric.loss_unchecked(out, y);
            let k = out.len();
            metric.gradient(out, y, &mut upstream[..k]);
            upstream[..k].iter_mut().for_each(|g| *g *= scale);

            for l in (0..layers.len()).rev() {
                let layer = &layers[l];
                let (n_out, n_in) = (layer.out_dim(), layer.in_dim());
                let join = shortcut.filter(|s| s.to == l);
                if let Some(s) = join {
                    let w = layers[s.from].out_dim();
                    if s.placement == ShortcutPlacement::PostActivation {
                        skip[..w].copy_from_slice(&upstream[..w]);
                    }
                }
                let act = layer.activation();
                for (j, d) in dz[..n_out].iter_mut().enumerate() {
                    let z = trace.pre[l][j];
                    *d = upstream[j] * act.derivative(z, act.apply(z));
                }
                if let Some(s) = join {
                    if s.placement == ShortcutPlacement::PreActivation {
                        skip[..n_out].copy_from_slice(&dz[..n_out]);
                    }
                }
                let input: &[f64] = if l == 0 { x } else { &trace.post[l - 1] };
                let (gw, gb) =
                    grad[offsets[l]..offsets[l] + n_out * n_in + n_out].split_at_mut(n_out * n_in);
                for (j, &d) in dz[..n_out].iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (g, a) in gw[j * n_in..(j + 1) * n_in].iter_mut().zip(input) {
                        *g += d * a;
                    }
                    gb[j] += d;
                }
                if l == 0 {
                    break;
                }
                let w = layer.weights().as_slice();
                upstream[..n_in].fill(0.0);
                for (j, &d) in dz[..n_out].iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (u, wv) in upstream[..n_in]
                        .iter_mut()
                        .zip(&w[j * n_in..(j + 1) * n_in])
                    {
                        *u += d * wv;
                    }
                }
                if let Some(s) = shortcut.filter(|s| s.from == l - 1) {
                    for (u, g) in upstream[..n_in]
                        .iter_mut()
                        .zip(&skip[..layers[s.from].out_dim()])
                    {
                        *u += g;
                    }
                }
            }
        }
        total += beta * sum / b.inputs.rows() as f64;
    }
    Ok((total, grad))
}

/// Central finite differences of the scalarized loss, one parameter at a time.
pub fn numerical_gradient(
    net: &Network,
    batches: &[Batch<'_>],
    metric: Metric,
    weights: &ScalarizationWeights,
    step: f64,
) -> Result<Vec<f64>> {
    let params = net.params();
    let mut probe = net.clone();
    let mut shifted = params.clone();
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        shifted[i] = params[i] + step;
        probe.set_params(&shifted)?;
        let up = scalarized_loss(&probe, batches, metric, weights)?;
        shifted[i] = params[i] - step;
        probe.set_params(&shifted)?;
        let down = scalarized_loss(&probe, batches, metric, weights)?;
        shifted[i] = params[i];
        out.push((up - down) / (2.0 * step));
    }
    Ok(out)
}

/// `|a - n| / max(|a|, |n|, floor)`, maximized over components.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_network, Activation, Architecture, DenseLayer};
    use crate::rng;
    use rand::Rng as _;

    fn random(rows: usize, cols: usize, lo: f64, hi: f64, seed: u64) -> Matrix {
        let mut r = rng::seeded(seed);
        Matrix::from_vec(
            rows,
            cols,
            (0..rows * cols).map(|_| r.random_range(lo..hi)).collect(),
        )
        .unwrap()
    }

    fn one_hot(rows: usize, k: usize, seed: u64) -> Matrix {
        let mut r = rng::seeded(seed);
        let mut m = Matrix::zeros(rows, k);
        for i in 0..rows {
            m[(i, r.random_range(0..k))] = 1.0;
        }
        m
    }

    fn gradient_matches(net: &Network, metric: Metric, seed: u64) {
        let k = net.output_dim();
        let x1 = random(4, net.input_dim(), 0.0, 1.0, seed);
        let x2 = random(3, net.input_dim(), 0.0, 1.0, seed + 1);
        let mut y1 = one_hot(4, k, seed + 2);
        let mut y2 = one_hot(3, k, seed + 3);
        if metric == Metric::Logistic {
            for y in [&mut y1, &mut y2] {
                y.as_mut_slice()
                    .iter_mut()
                    .for_each(|v| *v = 2.0 * *v - 1.0);
            }
        }
        let batches = [Batch::new(&x1, &y1), Batch::new(&x2, &y2)];
        let w = ScalarizationWeights::new(vec![0.7, 0.3]).unwrap();
        let (loss, g) = loss_and_grad(net, &batches, metric, &w).unwrap();
        assert!((loss - scalarized_loss(net, &batches, metric, &w).unwrap()).abs() < 1e-14);
        let n = numerical_gradient(net, &batches, metric, &w, 1e-5).unwrap();
        let err = max_relative_error(&g, &n, 1e-4);
        assert!(err < 1e-5, "{metric:?}: relative error {err}");
    }

    #[test]
    fn mlp_gradients() {
        let net = init_network(Architecture::Mlp, &[3, 4, 2], 1).unwrap();
        for m in [
            Metric::SquaredError,
            Metric::Logistic,
            Metric::BinaryCrossEntropy,
        ] {
            gradient_matches(&net, m, 10);
        }
    }

    #[test]
    fn residual_gradients() {
        for placement in [
            ShortcutPlacement::PreActivation,
            ShortcutPlacement::PostActivation,
        ] {
            let mut net = init_network(Architecture::Residual, &[3, 5, 5, 2], 2)
                .unwrap()
                .with_shortcut_placement(placement);
            // keep ReLU units away from their kink
            for l in &mut net.layers_mut()[..2] {
                l.bias_mut().fill(0.3);
            }
            for m in [Metric::SquaredError, Metric::BinaryCrossEntropy] {
                gradient_matches(&net, m, 20);
            }
        }
    }

    #[test]
    fn one_hot_weight_equals_single_dataset() {
        let net = init_network(Architecture::Mlp, &[3, 4, 2], 3).unwrap();
        let x1 = random(5, 3, 0.0, 1.0, 1);
        let x2 = random(5, 3, 0.0, 1.0, 2);
        let y = one_hot(5, 2, 3);
        let both = [Batch::new(&x1, &y), Batch::new(&x2, &y)];
        let w = ScalarizationWeights::new(vec![1.0, 0.0]).unwrap();
        let single = ScalarizationWeights::new(vec![1.0]).unwrap();
        let a = loss_and_grad(&net, &both, Metric::BinaryCrossEntropy, &w).unwrap();
        let b = loss_and_grad(&net, &both[..1], Metric::BinaryCrossEntropy, &single).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_in_weights() {
        let net = init_network(Architecture::Residual, &[3, 4, 4, 2], 4).unwrap();
        let x1 = random(5, 3, 0.0, 1.0, 1);
        let x2 = random(6, 3, 0.0, 1.0, 2);
        let y1 = one_hot(5, 2, 3);
        let y2 = one_hot(6, 2, 4);
        let bs = [Batch::new(&x1, &y1), Batch::new(&x2, &y2)];
        let m = Metric::SquaredError;
        let w = ScalarizationWeights::new(vec![0.25, 0.75]).unwrap();
        let w2 = ScalarizationWeights::unnormalized(vec![0.5, 1.5]).unwrap();
        let (l, g) = loss_and_grad(&net, &bs, m, &w).unwrap();
        let (l2, g2) = loss_and_grad(&net, &bs, m, &w2).unwrap();
        assert!((l2 - 2.0 * l).abs() < 1e-14);
        assert!(g.iter().zip(&g2).all(|(a, b)| (b - 2.0 * a).abs() < 1e-14));
        let e1 = loss_and_grad(
            &net,
            &bs,
            m,
            &ScalarizationWeights::new(vec![1.0, 0.0]).unwrap(),
        )
        .unwrap();
        let e2 = loss_and_grad(
            &net,
            &bs,
            m,
            &ScalarizationWeights::new(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        for ((g, a), b) in g.iter().zip(&e1.1).zip(&e2.1) {
            assert!((g - (0.25 * a + 0.75 * b)).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_errors() {
        let net = init_network(Architecture::Mlp, &[3, 4, 2], 3).unwrap();
        let x = random(2, 3, 0.0, 1.0, 1);
        let y = one_hot(2, 2, 1);
        let w = ScalarizationWeights::uniform(2).unwrap();
        assert!(loss_and_grad(&net, &[Batch::new(&x, &y)], Metric::SquaredError, &w).is_err());
        let empty = Matrix::zeros(0, 3);
        let ey = Matrix::zeros(0, 2);
        let one = ScalarizationWeights::uniform(1).unwrap();
        assert!(
            loss_and_grad(&net, &[Batch::new(&empty, &ey)], Metric::SquaredError, &one).is_err()
        );
        let wrong = Matrix::zeros(2, 4);
        assert!(
            loss_and_grad(&net, &[Batch::new(&wrong, &y)], Metric::SquaredError, &one).is_err()
        );
    }

    #[test]
    fn identity_network_gradient_is_exact() {
        // f(x) = w x + b with squared error: dL/dw = 2 (f - y) x
        let w = Matrix::from_vec(1, 1, vec![2.0]).unwrap();
        let net = Network::new(
            vec![DenseLayer::new(w, vec![1.0], Activation::Identity).unwrap()],
            None,
        )
        .unwrap();
        let x = Matrix::from_vec(1, 1, vec![3.0]).unwrap();
        let y = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        let one = ScalarizationWeights::uniform(1).unwrap();
        let (l, g) =
            loss_and_grad(&net, &[Batch::new(&x, &y)], Metric::SquaredError, &one).unwrap();
        assert_eq!(l, 36.0);
        assert_eq!(g, vec![36.0, 12.0]);
    }
}
