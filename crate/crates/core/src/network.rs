//! Dense feed-forward networks with an optional identity shortcut.
//!
//! Layer `l` computes `z = W a + b` from the previous activation `a` (the
//! input for `l = 0`) and emits `act(z)`. A [`Shortcut`] adds the output of
//! layer `from` to layer `to`, either to its pre-activation `z` or to its
//! output. Weights are `out x in`, row-major.
//!
//! The flat parameter vector (see [`Network::params`]) lists, layer by layer,
//! the weights row-major followed by the biases.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};

use crate::{rng, Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Sigmoid,
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                if z >= 0.0 {
                    1.0 / (1.0 + libm::exp(-z))
                } else {
                    let e = libm::exp(z);
                    e / (1.0 + e)
                }
            }
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative, given the pre-activation `z` and the output `a = act(z)`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Activation::Sigmoid, Activation::Relu, Activation::Identity]
            .into_iter()
            .find(|a| a.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::arg("layers must have nonzero width"));
        }
        if bias.len() != weights.rows() {
            return Err(Error::arg(format!(
                "bias has {} entries for {} outputs",
                bias.len(),
                weights.rows()
            )));
        }
        if weights
            .as_slice()
            .iter()
            .chain(&bias)
            .any(|v| !v.is_finite())
        {
            return Err(Error::arg("layer parameters must be finite"));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Result<Self> {
        Self::new(
            Matrix::zeros(outputs, inputs),
            vec![0.0; outputs],
            activation,
        )
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn param_count(&self) -> usize {
        self.weights.as_slice().len() + self.bias.len()
    }

    /// `out = W x + b`.
    #[inline]
    fn affine(&self, x: &[f64], out: &mut [f64]) {
        let cols = self.weights.cols();
        for (o, (row, b)) in out
            .iter_mut()
            .zip(self.weights.as_slice().chunks_exact(cols).zip(&self.bias))
        {
            *o = b + crate::matrix::dot(row, x);
        }
    }
}

/// Where the shortcut joins the target layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ShortcutPlacement {
    /// `a_to = act(W a + b + a_from)`.
    #[default]
    PreActivation,
    /// `a_to = act(W a + b) + a_from`.
    PostActivation,
}

impl ShortcutPlacement {
    pub fn name(self) -> &'static str {
        match self {
            ShortcutPlacement::PreActivation => "pre",
            ShortcutPlacement::PostActivation => "post",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "pre" => Some(ShortcutPlacement::PreActivation),
            "post" => Some(ShortcutPlacement::PostActivation),
            _ => None,
        }
    }
}

/// Identity connection from the output of layer `from` into layer `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shortcut {
    pub from: usize,
    pub to: usize,
    pub placement: ShortcutPlacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Sigmoid units throughout.
    Mlp,
    /// `d -> w (relu) -> w (relu, + shortcut from layer one) -> k (sigmoid)`.
    Residual,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::Mlp => "mlp",
            Architecture::Residual => "residual",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mlp" => Some(Architecture::Mlp),
            "residual" => Some(Architecture::Residual),
            _ => None,
        }
    }

    /// Layer widths used when none are given, for input width `d`.
    pub fn default_dims(self, d: usize) -> Vec<usize> {
        match self {
            Architecture::Mlp => vec![d, 25, 10],
            Architecture::Residual => vec![d, 64, 64, 10],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
    shortcut: Option<Shortcut>,
}

/// Pre-activations and outputs of every layer for one sample.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub(crate) pre: Vec<Vec<f64>>,
    pub(crate) post: Vec<Vec<f64>>,
}

impl Trace {
    pub(crate) fn new(net: &Network) -> Self {
        let widths = net.layers.iter().map(DenseLayer::out_dim);
        Self {
            pre: widths.clone().map(|w| vec![0.0; w]).collect(),
            post: widths.map(|w| vec![0.0; w]).collect(),
        }
    }

    pub(crate) fn output(&self) -> &[f64] {
        self.post.last().map_or(&[], Vec::as_slice)
    }
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>, shortcut: Option<Shortcut>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::arg("a network needs at least one layer"));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::arg(format!(
                    "layer {i} emits {} values but layer {} expects {}",
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        if let Some(s) = shortcut {
            if s.from >= s.to || s.to >= layers.len() {
                return Err(Error::arg(format!(
                    "shortcut {} -> {} is not a forward connection between existing layers",
                    s.from, s.to
                )));
            }
            if layers[s.from].out_dim() != layers[s.to].out_dim() {
                return Err(Error::arg(format!(
                    "shortcut joins widths {} and {}",
                    layers[s.from].out_dim(),
                    layers[s.to].out_dim()
                )));
            }
        }
        Ok(Self { layers, shortcut })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn shortcut(&self) -> Option<Shortcut> {
        self.shortcut
    }

    pub fn with_shortcut_placement(mut self, placement: ShortcutPlacement) -> Self {
        if let Some(s) = &mut self.shortcut {
            s.placement = placement;
        }
        self
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::arg(format!(
                "{} parameters given, network has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.weights.as_slice().len());
            let (b, tail) = tail.split_at(l.bias.len());
            l.weights.as_mut_slice().copy_from_slice(w);
            l.bias.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    /// `params -= lr * grad`, then clamp every parameter to `[-bound, bound]`
    /// when a box is given.
    pub(crate) fn descend(&mut self, grad: &[f64], lr: f64, bound: Option<f64>) {
        debug_assert_eq!(grad.len(), self.param_count());
        let mut g = grad;
        for l in &mut self.layers {
            let n = l.weights.as_slice().len();
            let nb = l.bias.len();
            for (p, d) in l.weights.as_mut_slice().iter_mut().zip(&g[..n]) {
                *p -= lr * d;
            }
            for (p, d) in l.bias.iter_mut().zip(&g[n..n + nb]) {
                *p -= lr * d;
            }
            g = &g[n + nb..];
        }
        if let Some(b) = bound {
            for l in &mut self.layers {
                for p in l.weights.as_mut_slice().iter_mut().chain(l.bias.iter_mut()) {
                    *p = p.clamp(-b, b);
                }
            }
        }
    }

    pub(crate) fn forward_into(&self, x: &[f64], trace: &mut Trace) {
        for (i, layer) in self.layers.iter().enumerate() {
            let (done, rest) = trace.post.split_at_mut(i);
            let input = if i == 0 { x } else { &done[i - 1] };
            let pre = &mut trace.pre[i];
            layer.affine(input, pre);
            let join = self.shortcut.filter(|s| s.to == i);
            if let Some(s) = join.filter(|s| s.placement == ShortcutPlacement::PreActivation) {
                for (z, a) in pre.iter_mut().zip(&done[s.from]) {
                    *z += a;
                }
            }
            let out = &mut rest[0];
            for (a, &z) in out.iter_mut().zip(pre.iter()) {
                *a = layer.activation.apply(z);
            }
            if let Some(s) = join.filter(|s| s.placement == ShortcutPlacement::PostActivation) {
                for (o, a) in out.iter_mut().zip(&done[s.from]) {
                    *o += a;
                }
            }
        }
    }

    /// Row-wise outputs for a `B x d` input matrix.
    pub fn forward(&self, inputs: &Matrix) -> Result<Matrix> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::arg(format!(
                "inputs have {} columns, network expects {}",
                inputs.cols(),
                self.input_dim()
            )));
        }
        let mut trace = Trace::new(self);
        let k = self.output_dim();
        let mut out = Matrix::zeros(inputs.rows(), k);
        for (i, x) in inputs.row_iter().enumerate() {
            self.forward_into(x, &mut trace);
            out.row_mut(i).copy_from_slice(trace.output());
        }
        Ok(out)
    }

    /// Output for a single input vector.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::arg(format!(
                "input has {} entries, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut trace = Trace::new(self);
        self.forward_into(x, &mut trace);
        Ok(trace.output().to_vec())
    }
}

/// Network with uniform `[-r, r]`, `r = sqrt(6 / (fan_in + fan_out))` weights
/// and zero biases, drawn in layer order from `seed`.
pub fn init_network(arch: Architecture, dims: &[usize], seed: u64) -> Result<Network> {
    if dims.contains(&0) {
        return Err(Error::arg("zero-size layer"));
    }
    let (activations, shortcut) = match arch {
        Architecture::Mlp => {
            if dims.len() < 2 {
                return Err(Error::arg("an MLP needs at least input and output widths"));
            }
            (vec![Activation::Sigmoid; dims.len() - 1], None)
        }
        Architecture::Residual => {
            if dims.len() != 4 || dims[1] != dims[2] {
                return Err(Error::arg(format!(
                    "residual dims must be (d, w, w, k), got {dims:?}"
                )));
            }
            (
                vec![Activation::Relu, Activation::Relu, Activation::Sigmoid],
                Some(Shortcut {
                    from: 0,
                    to: 1,
                    placement: ShortcutPlacement::PreActivation,
                }),
            )
        }
    };
    let mut rng = rng::seeded(seed);
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for (pair, act) in dims.windows(2).zip(activations) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let r = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
        let dist = Uniform::new_inclusive(-r, r).map_err(|e| Error::arg(format!("{e}")))?;
        let w: Vec<f64> = (0..fan_in * fan_out)
            .map(|_| dist.sample(&mut rng))
            .collect();
        layers.push(DenseLayer::new(
            Matrix::from_vec(fan_out, fan_in, w)?,
            vec![0.0; fan_out],
            act,
        )?);
    }
    Network::new(layers, shortcut)
}
