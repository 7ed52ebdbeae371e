//! Randomized suites over the checks in [`stability`](crate::stability),
//! [`synthetic`](crate::synthetic), [`pareto`](crate::pareto) and
//! [`backprop`](crate::backprop).
//!
//! Every suite is a deterministic function of `(trials, seed)`; trial `t`
//! draws from `derive_seed(seed, t)`. A row holds `lhs <= rhs` style
//! quantities; `holds` is `None` for instances whose hypotheses did not
//! certify, and those never count as violations.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::backprop::{loss_and_grad, max_relative_error, numerical_gradient, Batch};
use crate::dfe::ScalarizationWeights;
use crate::matrix::norm2;
use crate::metric::Metric;
use crate::network::{init_network, Activation, Architecture, DenseLayer, Network, Trace};
use crate::pareto::{self, ObjectivePointSet};
use crate::rng::{self, Rng};
use crate::stability::{
    verify_input_stability_with, verify_label_stability_with, LipschitzConstant,
};
use crate::synthetic::{self, BoundStatus, Grid, SyntheticProblem};
use crate::{Error, Matrix, Result};

/// Finite-difference step of the gradient suite.
pub const FD_STEP: f64 = 1e-5;
/// Largest accepted relative error between backprop and finite differences.
pub const GRADIENT_RTOL: f64 = 1e-5;
/// Denominator floor of the relative error, so that near-zero components are
/// compared in absolute terms.
pub const GRADIENT_FLOOR: f64 = 1e-4;
/// Inputs putting a ReLU pre-activation closer than this to zero are
/// redrawn: finite differences straddling the kink are meaningless.
pub const RELU_MARGIN: f64 = 1e-3;

pub const ESTIMATION_GRID_POINTS: usize = 2001;
pub const CONVERGENCE_GRID_POINTS: usize = 101;
pub const CONVERGENCE_N_MAX: usize = 64;
pub const CONVERGENCE_RHO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Gradient,
    Prop1,
    Prop2,
    Estimation,
    Convergence,
    Scalarization,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Gradient,
        Suite::Prop1,
        Suite::Prop2,
        Suite::Estimation,
        Suite::Convergence,
        Suite::Scalarization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Gradient => "gradient",
            Suite::Prop1 => "prop1",
            Suite::Prop2 => "prop2",
            Suite::Estimation => "estimation",
            Suite::Convergence => "convergence",
            Suite::Scalarization => "scalarization",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: Option<bool>,
    /// Short description of the instance.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub rows: Vec<TrialRow>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.holds == Some(false)).count()
    }

    pub fn uncertified(&self) -> usize {
        self.rows.iter().filter(|r| r.holds.is_none()).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    /// Largest `lhs / rhs` over certified rows with `rhs > 0`.
    pub fn worst_ratio(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.holds.is_some() && r.rhs > 0.0)
            .map(|r| r.lhs / r.rhs)
            .fold(0.0, f64::max)
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<SuiteReport> {
    let rows = match suite {
        Suite::Gradient => gradient_suite(trials, seed)?,
        Suite::Prop1 => prop1_suite(trials, seed)?,
        Suite::Prop2 => prop2_suite(trials, seed)?,
        Suite::Estimation => estimation_suite(trials, seed, ESTIMATION_GRID_POINTS)?,
        Suite::Convergence => {
            convergence_suite(trials, seed, CONVERGENCE_GRID_POINTS, CONVERGENCE_N_MAX)?
        }
        Suite::Scalarization => scalarization_suite(trials, seed, &[2, 3, 4])?,
    };
    Ok(SuiteReport { suite, rows })
}

fn uniform_matrix(rng: &mut Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect();
    Matrix::from_vec(rows, cols, data).expect("sized by construction")
}

fn one_hot(rng: &mut Rng, rows: usize, k: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, k);
    for i in 0..rows {
        m[(i, rng.random_range(0..k))] = 1.0;
    }
    m
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn near_relu_kink(net: &Network, inputs: &Matrix) -> bool {
    let mut trace = Trace::new(net);
    inputs.row_iter().any(|x| {
        net.forward_into(x, &mut trace);
        net.layers().iter().enumerate().any(|(l, layer)| {
            layer.activation() == Activation::Relu
                && trace.pre[l].iter().any(|z| z.abs() < RELU_MARGIN)
        })
    })
}

/// Backprop against central differences on small random networks, cycling
/// through both architectures and the three training metrics.
pub fn gradient_suite(trials: usize, seed: u64) -> Result<Vec<TrialRow>> {
    const METRICS: [Metric; 3] = [
        Metric::SquaredError,
        Metric::Logistic,
        Metric::BinaryCrossEntropy,
    ];
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = rng::seeded(rng::derive_seed(seed, t as u64));
        let arch = if t % 2 == 0 {
            Architecture::Mlp
        } else {
            Architecture::Residual
        };
        let metric = METRICS[(t / 2) % METRICS.len()];
        let d = rng.random_range(2..=4);
        let w = rng.random_range(2..=4);
        let k = rng.random_range(2..=3);
        let dims = match arch {
            Architecture::Mlp => vec![d, w, k],
            Architecture::Residual => vec![d, w, w, k],
        };
        let mut net = init_network(arch, &dims, rng.random())?;
        // nonzero biases so that bias gradients are exercised
        for l in net.layers_mut() {
            for b in l.bias_mut() {
                *b = rng.random_range(-0.5..0.5);
            }
        }
        let sizes = [
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        ];
        let mut xs: Vec<Matrix>;
        loop {
            xs = sizes
                .iter()
                .map(|&n| uniform_matrix(&mut rng, n, d, 0.0, 1.0))
                .collect();
            if !xs.iter().any(|x| near_relu_kink(&net, x)) {
                break;
            }
        }
        let ys: Vec<Matrix> = sizes
            .iter()
            .map(|&n| {
                let mut y = one_hot(&mut rng, n, k);
                if metric == Metric::Logistic {
                    y.as_mut_slice()
                        .iter_mut()
                        .for_each(|v| *v = 2.0 * *v - 1.0);
                }
                y
            })
            .collect();
        let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights = ScalarizationWeights::unnormalized(raw.iter().map(|b| b / total).collect())?;
        let batches: Vec<Batch<'_>> = xs.iter().zip(&ys).map(|(x, y)| Batch::new(x, y)).collect();
        let (_, analytic) = loss_and_grad(&net, &batches, metric, &weights)?;
        let numeric = numerical_gradient(&net, &batches, metric, &weights, FD_STEP)?;
        let err = max_relative_error(&analytic, &numeric, GRADIENT_FLOOR);
        rows.push(TrialRow {
            trial: t,
            lhs: err,
            rhs: GRADIENT_RTOL,
            holds: Some(err < GRADIENT_RTOL),
            note: format!(
                "{} {:?} {} params {}",
                arch.name(),
                dims,
                net.param_count(),
                metric.name()
            ),
        });
    }
    Ok(rows)
}

/// Label perturbations of random sigmoid networks on 50-sample datasets,
/// with the Euclidean distance on labels.
pub fn prop1_suite(trials: usize, seed: u64) -> Result<Vec<TrialRow>> {
    const SAMPLES: usize = 50;
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = rng::seeded(rng::derive_seed(seed, t as u64));
        let d = rng.random_range(2..=8);
        let k = rng.random_range(2..=5);
        let net = init_network(
            Architecture::Mlp,
            &[d, rng.random_range(2..=6), k],
            rng.random(),
        )?;
        let x = uniform_matrix(&mut rng, SAMPLES, d, 0.0, 1.0);
        let y = one_hot(&mut rng, SAMPLES, k);
        let out = net.forward(&x)?;
        let scale = libm::pow(10.0, rng.random_range(-3.0..1.0));
        let mut perturbed = y.clone();
        let kind = t % 3;
        match kind {
            0 => perturbed
                .as_mut_slice()
                .iter_mut()
                .for_each(|v| *v += scale * normal(&mut rng)),
            1 => {
                let i = rng.random_range(0..SAMPLES);
                perturbed
                    .row_mut(i)
                    .iter_mut()
                    .for_each(|v| *v += 10.0 * scale * normal(&mut rng));
            }
            _ => {
                for i in 0..SAMPLES {
                    if rng.random_bool(0.2) {
                        perturbed
                            .row_mut(i)
                            .iter_mut()
                            .for_each(|v| *v += scale * normal(&mut rng));
                    }
                }
            }
        }
        let r = verify_label_stability_with(&out, &y, &perturbed, Metric::Euclidean)?;
        rows.push(TrialRow {
            trial: t,
            lhs: r.lhs,
            rhs: r.rhs,
            holds: Some(r.holds),
            note: format!(
                "{} perturbation, scale {scale:.3e}",
                ["dense", "single", "sparse"][kind]
            ),
        });
    }
    Ok(rows)
}

/// Input perturbations of linear models `x -> lambda . x + b`, whose
/// Lipschitz constant `||lambda||` is supplied exactly.
pub fn prop2_suite(trials: usize, seed: u64) -> Result<Vec<TrialRow>> {
    const SAMPLES: usize = 50;
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = rng::seeded(rng::derive_seed(seed, t as u64));
        let d = rng.random_range(1..=10);
        let bound = rng.random_range(0.1..5.0);
        let mut lambda: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        let n = norm2(&lambda);
        let radius = bound * rng.random_range(0.1..1.0);
        lambda.iter_mut().for_each(|v| *v *= radius / n);
        let k = norm2(&lambda);
        let layer = DenseLayer::new(
            Matrix::from_vec(1, d, lambda.clone())?,
            vec![rng.random_range(-1.0..1.0)],
            Activation::Identity,
        )?;
        let net = Network::new(vec![layer], None)?;
        let x = uniform_matrix(&mut rng, SAMPLES, d, 0.0, 1.0);
        let y = uniform_matrix(&mut rng, SAMPLES, 1, -1.0, 1.0);
        let scale = libm::pow(10.0, rng.random_range(-3.0..0.0));
        let mut xp = x.clone();
        let kind = t % 3;
        match kind {
            0 => xp
                .as_mut_slice()
                .iter_mut()
                .for_each(|v| *v += scale * normal(&mut rng)),
            1 => {
                let i = rng.random_range(0..SAMPLES);
                xp.row_mut(i)
                    .iter_mut()
                    .for_each(|v| *v += scale * normal(&mut rng));
            }
            _ => {
                // along lambda: the worst case for a linear model
                for i in 0..SAMPLES {
                    let s = scale * normal(&mut rng) / k;
                    for (v, l) in xp.row_mut(i).iter_mut().zip(&lambda) {
                        *v += s * l;
                    }
                }
            }
        }
        let r = verify_input_stability_with(
            &net,
            &x,
            &y,
            &xp,
            Metric::Euclidean,
            LipschitzConstant::Supplied(k),
        )?;
        rows.push(TrialRow {
            trial: t,
            lhs: r.lhs,
            rhs: r.rhs,
            holds: Some(r.holds),
            note: format!(
                "{} perturbation, d {d}, K {k:.4}",
                ["dense", "single", "aligned"][kind]
            ),
        });
    }
    Ok(rows)
}

/// Random quadratic instances; `lhs` is the excess and `rhs` the bound plus
/// the grid tolerance.
pub fn estimation_suite(trials: usize, seed: u64, grid_points: usize) -> Result<Vec<TrialRow>> {
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials {
        let s = rng::derive_seed(seed, t as u64);
        let samples = 1 + (rng::seeded(s).random_range(0..4usize));
        let problem =
            synthetic::random_quadratic_problem(grid_points, samples, rng::derive_seed(s, 7))?;
        let r = synthetic::verify_estimation_bound(&problem, None)?;
        rows.push(TrialRow {
            trial: t,
            lhs: r.excess,
            rhs: r.bound + r.tolerance,
            holds: r.holds,
            note: format!(
                "N {samples}, h* {}, m* {:.4}{}",
                r.h_star.map_or(String::from("-"), |h| format!("{h:.6}")),
                r.m_star,
                if r.status == BoundStatus::HypothesesNotMet {
                    ", hypotheses not met"
                } else {
                    ""
                }
            ),
        });
    }
    Ok(rows)
}

/// Quadratic families `z^n = z0 + (c/n) v` on a 1-D grid of `[-1, 1]`;
/// `lhs` is the larger of the two set distances at `n_max`, `rhs` twice the
/// grid spacing.
pub fn convergence_suite(
    trials: usize,
    seed: u64,
    grid_points: usize,
    n_max: usize,
) -> Result<Vec<TrialRow>> {
    let grid = Grid::interval(-1.0, 1.0, grid_points)?;
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = rng::seeded(rng::derive_seed(seed, t as u64));
        let samples = rng.random_range(2..=3);
        let z0: Vec<Vec<f64>> = (0..samples)
            .map(|_| vec![rng.random_range(-0.8..0.8)])
            .collect();
        let direction: Vec<Vec<f64>> = (0..samples)
            .map(|_| vec![rng.random_range(-1.0..1.0)])
            .collect();
        let c = rng.random_range(0.01..0.2);
        let problem = SyntheticProblem {
            grid: grid.clone(),
            z: z0.clone(),
            z0,
            criterion: synthetic::quadratic,
            betas: ScalarizationWeights::uniform(samples)?.betas().to_vec(),
            delta: 1.0,
            m: 4.0,
            alpha: 2.0,
            h: 1.0,
            z_domain: (-1.0, 1.0),
            holder_samples: 0,
            seed: 0,
        };
        let r = synthetic::verify_convergence(&problem, &direction, c, n_max, CONVERGENCE_RHO)?;
        let last = r
            .rows
            .last()
            .ok_or_else(|| Error::Diagnostic("no rows".into()))?;
        let lhs = last.weak_distance.max(last.proper_distance.unwrap_or(0.0));
        rows.push(TrialRow {
            trial: t,
            lhs,
            rhs: r.tolerance,
            holds: Some(r.decayed),
            note: format!(
                "N {samples}, c {c:.3}, first distance {:.4}, monotone {}",
                r.rows[0].weak_distance, r.monotone
            ),
        });
    }
    Ok(rows)
}

fn random_point_set(rng: &mut Rng, p: usize) -> Result<ObjectivePointSet> {
    let n = rng.random_range(1..=30);
    // coarse lattices produce ties and weakly-but-not-strongly efficient points
    let lattice = rng.random_bool(0.5);
    let pts = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| {
                    if lattice {
                        f64::from(rng.random_range(0u8..5))
                    } else {
                        rng.random_range(0.0..1.0)
                    }
                })
                .collect()
        })
        .collect();
    ObjectivePointSet::new(pts)
}

/// Random finite sets in each dimension of `dims`: argmins of positive
/// weights must be efficient, argmins of nonnegative weights weakly
/// efficient. `lhs` counts exceptions.
pub fn scalarization_suite(trials: usize, seed: u64, dims: &[usize]) -> Result<Vec<TrialRow>> {
    let mut rows = Vec::with_capacity(trials * dims.len());
    for (di, &p) in dims.iter().enumerate() {
        for t in 0..trials {
            let mut rng = rng::seeded(rng::derive_seed(
                rng::derive_seed(seed, di as u64),
                t as u64,
            ));
            let set = random_point_set(&mut rng, p)?;
            let eff = pareto::efficient_set(&set);
            let weak = pareto::weakly_efficient_set(&set);
            let positive: Vec<f64> = (0..p).map(|_| rng.random_range(0.01..1.0)).collect();
            let mut nonneg = positive.clone();
            let zeros = rng.random_range(1..p);
            for _ in 0..zeros {
                let i = rng.random_range(0..p);
                nonneg[i] = 0.0;
            }
            if nonneg.iter().all(|&b| b == 0.0) {
                nonneg[0] = 1.0;
            }
            let strong = pareto::scalarization_argmin(&set, &positive)?;
            let weakish = pareto::scalarization_argmin(&set, &nonneg)?;
            let exceptions = strong.iter().filter(|i| !eff.contains(i)).count()
                + weakish.iter().filter(|i| !weak.contains(i)).count();
            rows.push(TrialRow {
                trial: di * trials + t,
                lhs: exceptions as f64,
                rhs: 0.0,
                holds: Some(exceptions == 0),
                note: format!("p {p}, {} points", set.len()),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
        assert_eq!(Suite::from_name("nope"), None);
    }

    #[test]
    fn small_suites_pass() {
        for s in Suite::ALL {
            let trials = if s == Suite::Estimation { 3 } else { 12 };
            let r = run_suite(s, trials, 42).unwrap();
            assert!(
                r.passed(),
                "{:?}: {:?}",
                s,
                r.rows.iter().find(|r| r.holds == Some(false))
            );
            assert_eq!(r.uncertified(), 0);
        }
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(prop1_suite(5, 9).unwrap(), prop1_suite(5, 9).unwrap());
        assert_eq!(
            scalarization_suite(5, 9, &[2, 3]).unwrap(),
            scalarization_suite(5, 9, &[2, 3]).unwrap()
        );
    }

    #[test]
    fn violation_counting() {
        let row = |holds| TrialRow {
            trial: 0,
            lhs: 1.0,
            rhs: 2.0,
            holds,
            note: String::new(),
        };
        let r = SuiteReport {
            suite: Suite::Prop1,
            rows: vec![row(Some(true)), row(Some(false)), row(None)],
        };
        assert_eq!((r.violations(), r.uncertified()), (1, 1));
        assert!(!r.passed());
        assert_eq!(r.worst_ratio(), 0.5);
    }
}
