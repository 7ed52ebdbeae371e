//! Grid checks of the set-valued estimation and convergence results.
//!
//! A [`SyntheticProblem`] has per-sample criteria `g(lambda, z_i)` over a
//! finite grid of parameters `lambda`, two data sets `z` (perturbed) and `z0`
//! (reference), and positive weights `beta`. The scalarized objective is
//! `l_z(lambda) = sum_i beta_i g(lambda, z_i)`, its argmin set over the grid
//! is `S_z`. Under
//!
//! - isolation: `l_z0(lambda) - l_z0(lambda0) >= h ||lambda - lambda0||^alpha`,
//! - Hoelder continuity: `|g(lambda, z1) - g(lambda, z2)| <= m d(z1, z2)^delta`,
//!
//! the argmin sets satisfy
//! `e(S_z, S_z0) <= (2m/h)^(1/alpha) (sum_i d(z_i, z0_i)^delta)^(1/alpha)`.
//! Both hypotheses are checked numerically on the grid before the bound is
//! compared.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::matrix::{distance, dot};
use crate::pareto::{self, DilatedCone, ObjectivePointSet};
use crate::{rng, Error, Result};

/// Relative slack when certifying `h* >= h` and `m* <= m`. The grid
/// differences entering `h*` are computed by cancellation.
pub const HYPOTHESIS_RTOL: f64 = 1e-6;

/// Finite sample of a 1-D or 2-D box.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<Vec<f64>>,
    spacing: f64,
}

fn axis(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::arg(format!(
            "grid axis [{lo}, {hi}] with {n} points is degenerate"
        )));
    }
    let span = hi - lo;
    let last = (n - 1) as f64;
    Ok((0..n).map(|i| lo + span * i as f64 / last).collect())
}

impl Grid {
    /// `n` equally spaced points `lo + (hi - lo) i / (n - 1)`.
    pub fn interval(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let xs = axis(lo, hi, n)?;
        Ok(Self {
            points: xs.into_iter().map(|x| vec![x]).collect(),
            spacing: (hi - lo) / (n - 1) as f64,
        })
    }

    /// Tensor grid; the first coordinate varies slowest.
    pub fn rect(lo: [f64; 2], hi: [f64; 2], n: [usize; 2]) -> Result<Self> {
        let xs = axis(lo[0], hi[0], n[0])?;
        let ys = axis(lo[1], hi[1], n[1])?;
        let mut points = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                points.push(vec![x, y]);
            }
        }
        let sx = (hi[0] - lo[0]) / (n[0] - 1) as f64;
        let sy = (hi[1] - lo[1]) / (n[1] - 1) as f64;
        Ok(Self {
            points,
            spacing: sx.max(sy),
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest per-axis step.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// Criterion `g(lambda, z)`.
pub type Criterion = fn(&[f64], &[f64]) -> f64;

/// `g(lambda, z) = ||lambda - z||^2`.
pub fn quadratic(lambda: &[f64], z: &[f64]) -> f64 {
    lambda.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    pub grid: Grid,
    /// Perturbed data.
    pub z: Vec<Vec<f64>>,
    /// Reference data.
    pub z0: Vec<Vec<f64>>,
    pub criterion: Criterion,
    pub betas: Vec<f64>,
    pub delta: f64,
    pub m: f64,
    pub alpha: f64,
    pub h: f64,
    /// Box `[lo, hi]` (per coordinate) from which Hoelder pairs are sampled.
    pub z_domain: (f64, f64),
    pub holder_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSide {
    Perturbed,
    Reference,
}

impl SyntheticProblem {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::arg("grid is empty"));
        }
        let n = self.z0.len();
        if n == 0 || self.z.len() != n || self.betas.len() != n {
            return Err(Error::arg(format!(
                "{} perturbed points, {} reference points and {} weights must agree and be nonzero",
                self.z.len(),
                n,
                self.betas.len()
            )));
        }
        let q = self.z0[0].len();
        if self.z.iter().chain(&self.z0).any(|p| p.len() != q) {
            return Err(Error::arg("data points have different dimensions"));
        }
        if self.betas.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::arg("weights must be positive"));
        }
        let sum: f64 = self.betas.iter().sum();
        if (sum - 1.0).abs() > crate::dfe::WEIGHT_SUM_TOLERANCE {
            return Err(Error::arg(format!("weights sum to {sum}, expected 1")));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("m", self.m),
            ("alpha", self.alpha),
            ("h", self.h),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::arg(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.z_domain.0 < self.z_domain.1) {
            return Err(Error::arg("data domain is empty"));
        }
        Ok(())
    }

    fn data(&self, side: DataSide) -> &[Vec<f64>] {
        match side {
            DataSide::Perturbed => &self.z,
            DataSide::Reference => &self.z0,
        }
    }

    /// `sum_i beta_i g(lambda, z_i)`.
    pub fn scalarized(&self, side: DataSide, lambda: &[f64]) -> f64 {
        self.data(side)
            .iter()
            .zip(&self.betas)
            .map(|(z, b)| b * (self.criterion)(lambda, z))
            .sum()
    }

    /// The criterion vector `(g(lambda, z_i))_i`.
    pub fn dfe(&self, data: &[Vec<f64>], lambda: &[f64]) -> Vec<f64> {
        data.iter().map(|z| (self.criterion)(lambda, z)).collect()
    }

    /// Indices of the grid restricted to the ball of `radius` around the
    /// reference minimizers, or the whole grid.
    fn region(&self, radius: Option<f64>) -> Result<Vec<usize>> {
        let all: Vec<usize> = (0..self.grid.len()).collect();
        let Some(r) = radius else {
            return Ok(all);
        };
        if !(r > 0.0) {
            return Err(Error::arg(format!(
                "neighborhood radius {r} must be positive"
            )));
        }
        let centers = self.argmin(DataSide::Reference, &all);
        let pts = self.grid.points();
        Ok(all
            .into_iter()
            .filter(|&i| centers.iter().any(|&c| distance(&pts[i], &pts[c]) <= r))
            .collect())
    }

    /// Grid indices in `region` attaining the minimum of the scalarized
    /// objective, compared exactly.
    fn argmin(&self, side: DataSide, region: &[usize]) -> Vec<usize> {
        let pts = self.grid.points();
        let values: Vec<f64> = region
            .iter()
            .map(|&i| self.scalarized(side, &pts[i]))
            .collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        region
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v == min)
            .map(|(&i, _)| i)
            .collect()
    }
}

/// `h* = min_{lambda != lambda0} (l(lambda) - l(lambda0)) / ||lambda - lambda0||^alpha`
/// over the grid (or the part of it within `radius` of the reference
/// minimizer).
pub fn isolated_minimizer_constant(
    problem: &SyntheticProblem,
    side: DataSide,
    alpha: f64,
    radius: Option<f64>,
) -> Result<f64> {
    problem.validate()?;
    if !(alpha > 0.0) {
        return Err(Error::arg(format!("alpha = {alpha} must be positive")));
    }
    let region = problem.region(radius)?;
    let mins = problem.argmin(side, &region);
    if mins.len() != 1 {
        return Err(Error::Diagnostic(format!(
            "grid has {} minimizers; it is too coarse to resolve a unique one",
            mins.len()
        )));
    }
    let pts = problem.grid.points();
    let l0 = &pts[mins[0]];
    let f0 = problem.scalarized(side, l0);
    let mut h = f64::INFINITY;
    for &i in &region {
        if i == mins[0] {
            continue;
        }
        let r = libm::pow(distance(&pts[i], l0), alpha);
        h = h.min((problem.scalarized(side, &pts[i]) - f0) / r);
    }
    if h == f64::INFINITY {
        return Err(Error::Diagnostic(
            "the grid region holds a single point".into(),
        ));
    }
    Ok(h)
}

/// `m* = max |g(lambda, z1) - g(lambda, z2)| / d(z1, z2)^delta` over grid
/// points `lambda` (within `radius` of the reference minimizer when given)
/// and pairs `(z1, z2)`: the data pairs `(z_i, z0_i)` plus
/// `holder_samples` pairs drawn uniformly from the data domain.
pub fn holder_constant(problem: &SyntheticProblem, delta: f64, radius: Option<f64>) -> Result<f64> {
    problem.validate()?;
    if !(delta > 0.0) {
        return Err(Error::arg(format!("delta = {delta} must be positive")));
    }
    let q = problem.z0[0].len();
    let (lo, hi) = problem.z_domain;
    let mut rng = rng::seeded(problem.seed);
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = problem
        .z
        .iter()
        .cloned()
        .zip(problem.z0.iter().cloned())
        .collect();
    for _ in 0..problem.holder_samples {
        let a = (0..q).map(|_| rng.random_range(lo..=hi)).collect();
        let b = (0..q).map(|_| rng.random_range(lo..=hi)).collect();
        pairs.push((a, b));
    }
    let region = problem.region(radius)?;
    let pts = problem.grid.points();
    let mut best: Option<f64> = None;
    for (a, b) in &pairs {
        let d = distance(a, b);
        if d == 0.0 {
            continue;
        }
        let denom = libm::pow(d, delta);
        let mut m: f64 = 0.0;
        for &i in &region {
            let lambda = &pts[i];
            m = m.max(((problem.criterion)(lambda, a) - (problem.criterion)(lambda, b)).abs());
        }
        let m = m / denom;
        best = Some(best.map_or(m, |x: f64| x.max(m)));
    }
    best.ok_or_else(|| Error::arg("every sampled pair is coincident"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Certified,
    HypothesesNotMet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub status: BoundStatus,
    pub excess: f64,
    pub bound: f64,
    /// Twice the grid spacing.
    pub tolerance: f64,
    /// `None` unless the hypotheses certified.
    pub holds: Option<bool>,
    /// `None` if the reference objective has no unique grid minimizer.
    pub h_star: Option<f64>,
    pub m_star: f64,
    pub minimizers_z: Vec<Vec<f64>>,
    pub minimizers_z0: Vec<Vec<f64>>,
}

/// Grid argmin sets of both objectives, their excess, and the bound, with
/// the hypotheses checked against `problem.h` and `problem.m`. With
/// `local_radius`, everything is restricted to the grid points within that
/// distance of the reference minimizer.
pub fn verify_estimation_bound(
    problem: &SyntheticProblem,
    local_radius: Option<f64>,
) -> Result<BoundReport> {
    problem.validate()?;
    let h_star = match isolated_minimizer_constant(
        problem,
        DataSide::Reference,
        problem.alpha,
        local_radius,
    ) {
        Ok(h) => Some(h),
        Err(Error::Diagnostic(_)) => None,
        Err(e) => return Err(e),
    };
    let m_star = holder_constant(problem, problem.delta, local_radius)?;
    let certified = h_star.is_some_and(|h| h >= problem.h * (1.0 - HYPOTHESIS_RTOL))
        && m_star <= problem.m * (1.0 + HYPOTHESIS_RTOL);

    let region = problem.region(local_radius)?;
    let pts = problem.grid.points();
    let collect = |idx: Vec<usize>| idx.into_iter().map(|i| pts[i].clone()).collect::<Vec<_>>();
    let minimizers_z = collect(problem.argmin(DataSide::Perturbed, &region));
    let minimizers_z0 = collect(problem.argmin(DataSide::Reference, &region));
    let excess = pareto::excess(&minimizers_z, &minimizers_z0)?;

    let inv = 1.0 / problem.alpha;
    let spread: f64 = problem
        .z
        .iter()
        .zip(&problem.z0)
        .map(|(a, b)| libm::pow(distance(a, b), problem.delta))
        .sum();
    let bound = libm::pow(2.0 * problem.m / problem.h, inv) * libm::pow(spread, inv);
    let tolerance = 2.0 * problem.grid.spacing();
    Ok(BoundReport {
        status: if certified {
            BoundStatus::Certified
        } else {
            BoundStatus::HypothesesNotMet
        },
        excess,
        bound,
        tolerance,
        holds: certified.then_some(excess <= bound + tolerance),
        h_star,
        m_star,
        minimizers_z,
        minimizers_z0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `e(WEff(DFE_n), WEff(DFE))` in parameter space.
    pub weak_distance: f64,
    /// `e(PEff_C(DFE_n), Eff(DFE))`, `None` when the proper set is empty.
    pub proper_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Twice the grid spacing.
    pub tolerance: f64,
    /// Both distances at `n_max` are within the tolerance.
    pub decayed: bool,
    /// The weak distances never increase.
    pub monotone: bool,
}

fn efficient_points(
    problem: &SyntheticProblem,
    data: &[Vec<f64>],
    select: impl Fn(&ObjectivePointSet) -> Vec<usize>,
) -> Result<Vec<Vec<f64>>> {
    let pts = problem.grid.points();
    let images = ObjectivePointSet::new(pts.iter().map(|l| problem.dfe(data, l)).collect())?;
    Ok(select(&images)
        .into_iter()
        .map(|i| pts[i].clone())
        .collect())
}

/// Efficient sets of the grid DFE under data `z^n = z0 + (c / n) direction`,
/// `n = 1..=n_max`, compared with those under `z0`. `problem.z` is ignored.
pub fn verify_convergence(
    problem: &SyntheticProblem,
    direction: &[Vec<f64>],
    c: f64,
    n_max: usize,
    rho: f64,
) -> Result<ConvergenceReport> {
    problem.validate()?;
    if direction.len() != problem.z0.len()
        || direction
            .iter()
            .zip(&problem.z0)
            .any(|(d, z)| d.len() != z.len())
    {
        return Err(Error::arg(
            "direction must match the shape of the reference data",
        ));
    }
    if n_max == 0 {
        return Err(Error::arg("n_max must be at least 1"));
    }
    let cone = DilatedCone::new(rho)?;
    let weak_ref = efficient_points(problem, &problem.z0, pareto::weakly_efficient_set)?;
    let eff_ref = efficient_points(problem, &problem.z0, pareto::efficient_set)?;
    if weak_ref.is_empty() || eff_ref.is_empty() {
        return Err(Error::Diagnostic(
            "empty efficient set on a finite grid".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let s = c / n as f64;
        let zn: Vec<Vec<f64>> = problem
            .z0
            .iter()
            .zip(direction)
            .map(|(z, d)| z.iter().zip(d).map(|(a, b)| a + s * b).collect())
            .collect();
        let weak = efficient_points(problem, &zn, pareto::weakly_efficient_set)?;
        let proper = efficient_points(problem, &zn, |set| {
            pareto::properly_efficient_set(set, &cone)
        })?;
        rows.push(ConvergenceRow {
            n,
            weak_distance: pareto::excess(&weak, &weak_ref)?,
            proper_distance: if proper.is_empty() {
                None
            } else {
                Some(pareto::excess(&proper, &eff_ref)?)
            },
        });
    }
    let tolerance = 2.0 * problem.grid.spacing();
    let last = &rows[rows.len() - 1];
    let decayed =
        last.weak_distance <= tolerance && last.proper_distance.is_none_or(|d| d <= tolerance);
    let monotone = rows
        .windows(2)
        .all(|w| w[1].weak_distance <= w[0].weak_distance);
    Ok(ConvergenceReport {
        rows,
        tolerance,
        decayed,
        monotone,
    })
}

/// Quadratic instance on a 1-D grid of `[-1, 1]` with `n` samples in
/// `[-1, 1]`. The reference data is shifted by less than one grid step so
/// that its weighted mean, the reference minimizer, is a grid point; `h = 1`,
/// `alpha = 2`, `m = 4`, `delta = 1` then hold exactly.
pub fn random_quadratic_problem(
    grid_points: usize,
    samples: usize,
    seed: u64,
) -> Result<SyntheticProblem> {
    if samples == 0 {
        return Err(Error::arg("at least one sample is required"));
    }
    let grid = Grid::interval(-1.0, 1.0, grid_points)?;
    let step = grid.spacing();
    let mut rng = rng::seeded(seed);
    let (betas, z, z0) = loop {
        let raw: Vec<f64> = (0..samples).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut betas: Vec<f64> = raw.iter().map(|b| b / total).collect();
        // make the sequential sum exactly one
        let s: f64 = betas.iter().sum();
        betas[0] += 1.0 - s;
        let z: Vec<f64> = (0..samples).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mut z0: Vec<f64> = (0..samples).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mean = dot(&betas, &z0);
        let k = libm::floor((mean + 1.0) / step);
        let shifted = [k, k + 1.0].into_iter().find_map(|k| {
            let target = -1.0 + 2.0 * k / (grid_points - 1) as f64;
            let shift = target - mean;
            z0.iter()
                .all(|v| (-1.0..=1.0).contains(&(v + shift)))
                .then_some(shift)
        });
        if let Some(shift) = shifted {
            z0.iter_mut().for_each(|v| *v += shift);
            break (betas, z, z0);
        }
    };
    Ok(SyntheticProblem {
        grid,
        z: z.into_iter().map(|v| vec![v]).collect(),
        z0: z0.into_iter().map(|v| vec![v]).collect(),
        criterion: quadratic,
        betas,
        delta: 1.0,
        m: 4.0,
        alpha: 2.0,
        h: 1.0,
        z_domain: (-1.0, 1.0),
        holder_samples: 64,
        seed: rng::derive_seed(seed, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(lambda: &[f64], _z: &[f64]) -> f64 {
        lambda[0] * lambda[0]
    }

    fn square_plus(lambda: &[f64], _z: &[f64]) -> f64 {
        lambda[0] * lambda[0] + 7.5
    }

    fn doubled(lambda: &[f64], z: &[f64]) -> f64 {
        2.0 * quadratic(lambda, z)
    }

    fn worked(grid_points: usize) -> SyntheticProblem {
        SyntheticProblem {
            grid: Grid::interval(-1.0, 1.0, grid_points).unwrap(),
            z: vec![vec![0.2], vec![0.2]],
            z0: vec![vec![0.0], vec![0.0]],
            criterion: quadratic,
            betas: vec![0.5, 0.5],
            delta: 1.0,
            m: 4.0,
            alpha: 2.0,
            h: 1.0,
            z_domain: (-1.0, 1.0),
            holder_samples: 500,
            seed: 11,
        }
    }

    #[test]
    fn grid_construction() {
        let g = Grid::interval(-1.0, 1.0, 2001).unwrap();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.points()[1000], vec![0.0]);
        assert!((g.spacing() - 0.001).abs() < 1e-15);
        assert_eq!(
            Grid::rect([0.0, 0.0], [1.0, 2.0], [3, 5]).unwrap().len(),
            15
        );
        assert!(Grid::interval(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn isolation_of_square() {
        let mut p = worked(201);
        p.criterion = square;
        let h = isolated_minimizer_constant(&p, DataSide::Reference, 2.0, None).unwrap();
        assert!((h - 1.0).abs() < 1e-9);
        let h1 = isolated_minimizer_constant(&p, DataSide::Reference, 1.0, None).unwrap();
        assert!((h1 - 0.01).abs() < 1e-9);
        let fine = with_grid(&p, 2001);
        let h1f = isolated_minimizer_constant(&fine, DataSide::Reference, 1.0, None).unwrap();
        assert!(h1f < h1);
        p.criterion = square_plus;
        let hc = isolated_minimizer_constant(&p, DataSide::Reference, 2.0, None).unwrap();
        assert!((hc - 1.0).abs() < 1e-9);
    }

    fn with_grid(p: &SyntheticProblem, n: usize) -> SyntheticProblem {
        let mut q = p.clone();
        q.grid = Grid::interval(-1.0, 1.0, n).unwrap();
        q
    }

    #[test]
    fn tied_minimizers_are_diagnosed() {
        let mut p = worked(4);
        p.grid = Grid::interval(-1.5, 1.5, 4).unwrap();
        // grid -1.5, -0.5, 0.5, 1.5: two minimizers of lambda^2
        let err = isolated_minimizer_constant(&p, DataSide::Reference, 2.0, None).unwrap_err();
        assert!(matches!(err, Error::Diagnostic(_)));
        let r = verify_estimation_bound(&p, None).unwrap();
        assert_eq!(r.status, BoundStatus::HypothesesNotMet);
        assert_eq!(r.holds, None);
    }

    #[test]
    fn holder_of_quadratic() {
        let p = worked(201);
        let m = holder_constant(&p, 1.0, None).unwrap();
        assert!(m <= 4.0 + 1e-12 && m > 3.5, "m* = {m}");
        let mut q = p.clone();
        q.criterion = square;
        assert_eq!(holder_constant(&q, 1.0, None).unwrap(), 0.0);
        let mut d = p.clone();
        d.criterion = doubled;
        let m2 = holder_constant(&d, 1.0, None).unwrap();
        assert!((m2 - 2.0 * m).abs() < 1e-12);
        let mut c = p.clone();
        c.z = c.z0.clone();
        c.holder_samples = 0;
        assert!(holder_constant(&c, 1.0, None).is_err());
    }

    #[test]
    fn worked_estimation_instance() {
        let r = verify_estimation_bound(&worked(2001), None).unwrap();
        assert_eq!(r.status, BoundStatus::Certified);
        assert!((r.excess - 0.2).abs() < 1e-12);
        assert!((r.bound - libm::sqrt(3.2)).abs() < 1e-12);
        assert!((r.bound - 1.789).abs() < 1e-3);
        assert_eq!(r.holds, Some(true));
    }

    #[test]
    fn identical_data_has_zero_excess() {
        let mut p = worked(2001);
        p.z = p.z0.clone();
        let r = verify_estimation_bound(&p, None).unwrap();
        assert_eq!((r.excess, r.bound), (0.0, 0.0));
        assert_eq!(r.holds, Some(true));
    }

    #[test]
    fn local_variant() {
        let r = verify_estimation_bound(&worked(2001), Some(0.5)).unwrap();
        assert_eq!(r.holds, Some(true));
        assert!((r.excess - 0.2).abs() < 1e-12);
    }

    #[test]
    fn random_instances_hold() {
        for seed in 0..20 {
            let p = random_quadratic_problem(2001, 3, seed).unwrap();
            let r = verify_estimation_bound(&p, None).unwrap();
            assert_eq!(r.status, BoundStatus::Certified, "seed {seed}: {r:?}");
            assert_eq!(r.holds, Some(true));
        }
    }

    #[test]
    fn convergence_constant_schedule() {
        let mut p = worked(101);
        p.z0 = vec![vec![-0.5], vec![0.5]];
        let dir = vec![vec![0.0], vec![0.0]];
        let r = verify_convergence(&p, &dir, 1.0, 8, 0.1).unwrap();
        assert!(r.rows.iter().all(|row| row.weak_distance == 0.0));
        assert!(r.decayed && r.monotone);
    }

    #[test]
    fn convergence_decays() {
        let mut p = worked(101);
        p.z0 = vec![vec![-0.5], vec![0.3]];
        let dir = vec![vec![-1.0], vec![1.0]];
        let r = verify_convergence(&p, &dir, 0.4, 64, 0.1).unwrap();
        assert!(r.rows[0].weak_distance > r.tolerance);
        assert!(r.decayed, "{:?}", r.rows.last());
    }
}
