//! Labeled datasets: normalization, seeded splitting and noise augmentation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::{rng, Error, Matrix, Result};

/// Number of classes for digit data.
pub const DIGIT_CLASSES: usize = 10;

/// Unnormalized images with their class labels, as stored in IDX files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDataset {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
    labels: Vec<u8>,
}

impl RawDataset {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>, labels: Vec<u8>) -> Result<Self> {
        if pixels.len() != labels.len() * rows * cols {
            return Err(Error::Inconsistent(format!(
                "{} pixel bytes do not hold {} images of {rows}x{cols}",
                pixels.len(),
                labels.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            pixels,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image_rows(&self) -> usize {
        self.rows
    }

    pub fn image_cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }

    /// Keep the central `size x size` window of every image.
    ///
    /// Cropping 28x28 digits to 20x20 gives the 400-dimensional inputs of the
    /// classic digit-recognition setup.
    pub fn center_crop(&self, size: usize) -> Result<Self> {
        if size == 0 || size > self.rows || size > self.cols {
            return Err(Error::arg(format!(
                "cannot crop {}x{} images to {size}x{size}",
                self.rows, self.cols
            )));
        }
        let top = (self.rows - size) / 2;
        let left = (self.cols - size) / 2;
        let mut pixels = Vec::with_capacity(self.len() * size * size);
        for i in 0..self.len() {
            let img = self.image(i);
            for r in top..top + size {
                pixels.extend_from_slice(&img[r * self.cols + left..r * self.cols + left + size]);
            }
        }
        Self::new(size, size, pixels, self.labels.clone())
    }

    /// The first `n` samples.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            rows: self.rows,
            cols: self.cols,
            pixels: self.pixels[..n * self.rows * self.cols].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }
}

/// Inputs in `[0, 1]^d` with one-hot targets.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    inputs: Matrix,
    targets: Matrix,
    source_sigma: f64,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, inputs: Matrix, targets: Matrix) -> Result<Self> {
        if inputs.rows() != targets.rows() {
            return Err(Error::Inconsistent(format!(
                "{} input rows but {} target rows",
                inputs.rows(),
                targets.rows()
            )));
        }
        if let Some(v) = inputs.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidData(format!(
                "input value {v} outside [0, 1]"
            )));
        }
        for (i, row) in targets.row_iter().enumerate() {
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return Err(Error::InvalidData(format!("target row {i} is not one-hot")));
            }
        }
        Ok(Self {
            name: name.into(),
            inputs,
            targets,
            source_sigma: 0.0,
        })
    }

    /// One-hot encode `labels` over `classes` classes.
    pub fn from_labels(
        name: impl Into<String>,
        inputs: Matrix,
        labels: &[usize],
        classes: usize,
    ) -> Result<Self> {
        let mut targets = Matrix::zeros(labels.len(), classes);
        for (i, &l) in labels.iter().enumerate() {
            if l >= classes {
                return Err(Error::InvalidData(format!(
                    "label {l} outside 0..{classes} at sample {i}"
                )));
            }
            targets[(i, l)] = 1.0;
        }
        Self::new(name, inputs, targets)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn targets(&self) -> &Matrix {
        &self.targets
    }

    /// Standard deviation of the noise this dataset was augmented with.
    pub fn source_sigma(&self) -> f64 {
        self.source_sigma
    }

    pub fn with_source_sigma(mut self, sigma: f64) -> Self {
        self.source_sigma = sigma;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn classes(&self) -> usize {
        self.targets.cols()
    }

    /// Class index of every sample.
    pub fn labels(&self) -> Vec<usize> {
        self.targets
            .row_iter()
            .map(|r| r.iter().position(|&v| v == 1.0).unwrap_or(0))
            .collect()
    }

    /// Subset with the given rows, in order. Name and sigma carry over.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            inputs: self.inputs.select_rows(indices),
            targets: self.targets.select_rows(indices),
            source_sigma: self.source_sigma,
        }
    }

    /// Concatenate datasets. All must share input and target widths.
    pub fn concat(name: impl Into<String>, parts: &[&LabeledDataset]) -> Result<Self> {
        let inputs: Vec<&Matrix> = parts.iter().map(|p| &p.inputs).collect();
        let targets: Vec<&Matrix> = parts.iter().map(|p| &p.targets).collect();
        Ok(Self {
            name: name.into(),
            inputs: Matrix::vstack(&inputs)?,
            targets: Matrix::vstack(&targets)?,
            source_sigma: 0.0,
        })
    }
}

/// How to partition a dataset into `parts` subsets and how much noise each
/// subset receives afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub parts: usize,
    pub seed: u64,
    pub sigmas: Vec<f64>,
}

impl SplitSpec {
    pub fn new(parts: usize, seed: u64, sigmas: Vec<f64>) -> Result<Self> {
        if parts == 0 {
            return Err(Error::arg("split needs at least one part"));
        }
        if sigmas.len() != parts {
            return Err(Error::arg(format!(
                "{} sigmas given for {parts} parts",
                sigmas.len()
            )));
        }
        if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::arg(format!(
                "sigma {s} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            parts,
            seed,
            sigmas,
        })
    }
}

/// Scale pixels to `[0, 1]` and one-hot encode digit labels.
pub fn normalize(raw: &RawDataset) -> Result<LabeledDataset> {
    let d = raw.image_rows() * raw.image_cols();
    let inputs: Vec<f64> = raw.pixels().iter().map(|&p| f64::from(p) / 255.0).collect();
    let inputs = Matrix::from_vec(raw.len(), d, inputs)?;
    let labels: Vec<usize> = raw.labels().iter().map(|&l| l as usize).collect();
    LabeledDataset::from_labels("mnist", inputs, &labels, DIGIT_CLASSES)
}

/// Seeded permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    idx
}

/// Shuffle rows with a seeded permutation and cut them into `spec.parts`
/// contiguous pieces whose sizes differ by at most one; earlier parts take
/// the remainder.
pub fn split(data: &LabeledDataset, spec: &SplitSpec) -> Result<Vec<LabeledDataset>> {
    let n = data.len();
    let m = spec.parts;
    if m == 0 || m > n {
        return Err(Error::arg(format!(
            "cannot split {n} samples into {m} parts"
        )));
    }
    let perm = permutation(n, spec.seed);
    let (base, extra) = (n / m, n % m);
    let mut parts = Vec::with_capacity(m);
    let mut start = 0;
    for i in 0..m {
        let size = base + usize::from(i < extra);
        let part = data.select(&perm[start..start + size]).with_name(format!(
            "{}/part{}",
            data.name(),
            i + 1
        ));
        parts.push(part);
        start += size;
    }
    Ok(parts)
}

/// Independent `Normal(0, sigma^2)` draws, row-major.
pub fn gaussian_noise(rows: usize, cols: usize, sigma: f64, seed: u64) -> Result<Matrix> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|_| Error::arg(format!("sigma {sigma} must be finite and nonnegative")))?;
    let mut rng = rng::seeded(seed);
    let data = (0..rows * cols).map(|_| normal.sample(&mut rng)).collect();
    Matrix::from_vec(rows, cols, data)
}

/// Add zero-mean Gaussian noise to every input entry and clamp back into
/// `[0, 1]`. Targets are untouched.
pub fn add_gaussian_noise(data: &LabeledDataset, sigma: f64, seed: u64) -> Result<LabeledDataset> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::arg(format!(
            "sigma {sigma} must be finite and nonnegative"
        )));
    }
    let mut inputs = data.inputs.clone();
    if sigma > 0.0 {
        let noise = gaussian_noise(inputs.rows(), inputs.cols(), sigma, seed)?;
        for (x, e) in inputs.as_mut_slice().iter_mut().zip(noise.as_slice()) {
            *x = (*x + e).clamp(0.0, 1.0);
        }
    }
    Ok(LabeledDataset {
        name: data.name.to_string(),
        inputs,
        targets: data.targets.clone(),
        source_sigma: sigma,
    })
}
