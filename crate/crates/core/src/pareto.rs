//! Efficiency analysis on finite point sets, by brute force.
//!
//! All functions minimize. Set-valued results are index lists in ascending
//! order; ties are always kept.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{distance, dot, norm2};
use crate::{Error, Result};

/// Finite set of points in `R^p`, `p >= 1`, with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectivePointSet {
    points: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl ObjectivePointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::arg("point set is empty"));
        }
        let p = points[0].len();
        if p == 0 {
            return Err(Error::arg("points must have at least one coordinate"));
        }
        if let Some(i) = points.iter().position(|x| x.len() != p) {
            return Err(Error::arg(format!(
                "point {i} has {} coordinates, expected {p}",
                points[i].len()
            )));
        }
        Ok(Self {
            points,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::arg(format!(
                "{} labels for {} points",
                labels.len(),
                self.points.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::arg(format!(
            "points have {} and {} coordinates",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a != b
}

fn strictly_below(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x < y)
}

/// `a <= b` componentwise and `a != b`.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_dims(a, b)?;
    Ok(dominates_unchecked(a, b))
}

fn undominated(set: &ObjectivePointSet, beats: impl Fn(&[f64], &[f64]) -> bool) -> Vec<usize> {
    let pts = set.points();
    (0..pts.len())
        .filter(|&i| !pts.iter().any(|q| beats(q, &pts[i])))
        .collect()
}

/// Points dominated by no other point.
pub fn efficient_set(set: &ObjectivePointSet) -> Vec<usize> {
    undominated(set, dominates_unchecked)
}

/// Points with no other point strictly smaller in every coordinate.
pub fn weakly_efficient_set(set: &ObjectivePointSet) -> Vec<usize> {
    undominated(set, strictly_below)
}

/// `C_rho = { y : min_i y_i >= -rho ||y||_2 }`.
///
/// `C_rho` contains the nonnegative orthant with every nonzero orthant point in
/// its interior. For `rho >= 1` it is the whole space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilatedCone {
    rho: f64,
}

impl DilatedCone {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::arg(format!("cone dilation {rho} must be positive")));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        let min = y.iter().copied().fold(f64::INFINITY, f64::min);
        min >= -self.rho * norm2(y)
    }
}

/// Points `y` such that no other point `y'` has `y - y'` in `cone`.
pub fn properly_efficient_set(set: &ObjectivePointSet, cone: &DilatedCone) -> Vec<usize> {
    let mut diff = vec![0.0; set.dim()];
    let pts = set.points();
    (0..pts.len())
        .filter(|&i| {
            !pts.iter().any(|q| {
                if *q == pts[i] {
                    return false;
                }
                for ((d, a), b) in diff.iter_mut().zip(&pts[i]).zip(q) {
                    *d = a - b;
                }
                cone.contains(&diff)
            })
        })
        .collect()
}

fn check_betas(betas: &[f64], p: usize) -> Result<()> {
    if betas.len() != p {
        return Err(Error::arg(format!(
            "{} weights for {p} objectives",
            betas.len()
        )));
    }
    if let Some(b) = betas.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
        return Err(Error::arg(format!("weight {b} is negative or not finite")));
    }
    if betas.iter().all(|&b| b == 0.0) {
        return Err(Error::arg("weights are all zero"));
    }
    Ok(())
}

/// Indices attaining `min sum_i beta_i y_i`, compared exactly.
pub fn scalarization_argmin(set: &ObjectivePointSet, betas: &[f64]) -> Result<Vec<usize>> {
    check_betas(betas, set.dim())?;
    let values: Vec<f64> = set.points().iter().map(|y| dot(betas, y)).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((0..values.len()).filter(|&i| values[i] == min).collect())
}

/// `sup_{a in A} inf_{c in C} ||a - c||_2`.
pub fn excess<A: AsRef<[f64]>, C: AsRef<[f64]>>(a_set: &[A], c_set: &[C]) -> Result<f64> {
    if a_set.is_empty() || c_set.is_empty() {
        return Err(Error::arg("excess needs two nonempty sets"));
    }
    let dim = a_set[0].as_ref().len();
    if a_set
        .iter()
        .map(AsRef::as_ref)
        .chain(c_set.iter().map(AsRef::as_ref))
        .any(|x| x.len() != dim)
    {
        return Err(Error::arg("excess: points have different dimensions"));
    }
    let mut sup: f64 = 0.0;
    for a in a_set {
        let inf = c_set
            .iter()
            .map(|c| distance(a.as_ref(), c.as_ref()))
            .fold(f64::INFINITY, f64::min);
        sup = sup.max(inf);
    }
    Ok(sup)
}

/// Searches the strictly positive weights `k / resolution` on the simplex for
/// one whose scalarization argmin contains point `index`. Returns the first
/// hit in lexicographic order.
pub fn supporting_weights(
    set: &ObjectivePointSet,
    index: usize,
    resolution: usize,
) -> Result<Option<Vec<f64>>> {
    let p = set.dim();
    if index >= set.len() {
        return Err(Error::arg(format!("index {index} out of range")));
    }
    if resolution < p {
        return Err(Error::arg(format!(
            "resolution {resolution} admits no positive weights in dimension {p}"
        )));
    }
    let mut parts = vec![1usize; p];
    parts[p - 1] = resolution - (p - 1);
    loop {
        let betas: Vec<f64> = parts
            .iter()
            .map(|&k| k as f64 / resolution as f64)
            .collect();
        if scalarization_argmin(set, &betas)?.contains(&index) {
            return Ok(Some(betas));
        }
        if !next_composition(&mut parts) {
            return Ok(None);
        }
    }
}

/// Steps through compositions of a fixed total into positive parts, in
/// lexicographic order. Returns false after the last one.
fn next_composition(parts: &mut [usize]) -> bool {
    let p = parts.len();
    if p < 2 {
        return false;
    }
    // rightmost position (excluding the last) that can grow
    let Some(j) = (0..p - 1)
        .rev()
        .find(|&j| parts[j + 1..].iter().any(|&k| k > 1))
    else {
        return false;
    };
    let tail: usize = parts[j + 1..].iter().sum();
    parts[j] += 1;
    for k in parts[j + 1..].iter_mut() {
        *k = 1;
    }
    parts[p - 1] = tail - 1 - (p - j - 2);
    true
}
