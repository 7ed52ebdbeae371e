//! Experiment configuration, read from TOML. Every field has a default and
//! the command line may override any of them.

use std::path::{Path, PathBuf};

use multifit_core::dfe::epsilon_weights;
use multifit_core::metric::Metric;
use multifit_core::network::{Architecture, ShortcutPlacement};
use multifit_core::train::{default_learning_rate, DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Directory holding the IDX files.
    pub data_dir: PathBuf,
    pub images_file: String,
    pub labels_file: String,
    pub out_dir: PathBuf,
    /// Use only the first `n` samples of the IDX files.
    pub sample_count: Option<usize>,
    /// Center-crop images to `crop x crop` pixels.
    pub crop: Option<usize>,
    /// Number of training subsets.
    pub parts: usize,
    /// Noise level of each subset; the first is conventionally 0.
    pub sigmas: Vec<f64>,
    /// Share of the clean data held out for validation before splitting.
    pub validation_fraction: f64,
    pub seed: u64,
    /// `mlp` or `residual`.
    pub arch: String,
    /// Hidden widths; the architecture default when absent.
    pub hidden: Option<Vec<usize>>,
    /// Where the residual shortcut joins: `pre` or `post` activation.
    pub shortcut: String,
    pub metric: String,
    pub epochs: usize,
    pub batch_size: usize,
    /// Architecture default when absent.
    pub learning_rate: Option<f64>,
    pub param_box: Option<f64>,
    /// Perturbations swept in addition to the benchmark `0`.
    pub epsilon_grid: Vec<f64>,
    /// Training seeds of a sweep; `[seed]` when empty.
    pub seeds: Vec<u64>,
    /// Concurrent sweep cells; `0` picks the number of available cores.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data/mnist"),
            images_file: "train-images-idx3-ubyte".into(),
            labels_file: "train-labels-idx1-ubyte".into(),
            out_dir: PathBuf::from("out"),
            sample_count: None,
            crop: None,
            parts: 3,
            sigmas: vec![0.0, 0.1, 0.2],
            validation_fraction: 0.2,
            seed: 0,
            arch: "mlp".into(),
            hidden: None,
            shortcut: "pre".into(),
            metric: Metric::BinaryCrossEntropy.name().into(),
            epochs: DEFAULT_EPOCHS,
            batch_size: DEFAULT_BATCH_SIZE,
            learning_rate: None,
            param_box: None,
            epsilon_grid: vec![0.001, 0.0025, 0.005, 0.0075, 0.01],
            seeds: Vec::new(),
            jobs: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.parts == 0 {
            return Err(Error::Config("parts must be at least 1".into()));
        }
        if self.sigmas.len() != self.parts {
            return Err(Error::Config(format!(
                "{} sigmas for {} parts",
                self.sigmas.len(),
                self.parts
            )));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config(format!(
                "validation_fraction {} must lie in (0, 1)",
                self.validation_fraction
            )));
        }
        self.architecture()?;
        self.placement()?;
        self.training_metric()?;
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch_size must be at least 1".into(),
            ));
        }
        if let Some(lr) = self.learning_rate {
            if !(lr >= 0.0) || !lr.is_finite() {
                return Err(Error::Config(format!(
                    "learning rate {lr} must be nonnegative"
                )));
            }
        }
        for &eps in &self.epsilon_grid {
            epsilon_weights(self.parts, eps)?;
        }
        Ok(())
    }

    pub fn architecture(&self) -> Result<Architecture> {
        Architecture::from_name(&self.arch)
            .ok_or_else(|| Error::Config(format!("unknown architecture '{}'", self.arch)))
    }

    pub fn placement(&self) -> Result<ShortcutPlacement> {
        ShortcutPlacement::from_name(&self.shortcut)
            .ok_or_else(|| Error::Config(format!("unknown shortcut placement '{}'", self.shortcut)))
    }

    pub fn training_metric(&self) -> Result<Metric> {
        Metric::from_name(&self.metric)
            .ok_or_else(|| Error::Config(format!("unknown metric '{}'", self.metric)))
    }

    pub fn learning_rate(&self) -> Result<f64> {
        Ok(self.learning_rate.unwrap_or_else(|| {
            self.architecture().map_or(
                default_learning_rate(Architecture::Mlp),
                default_learning_rate,
            )
        }))
    }

    /// Layer widths for inputs of width `d` and `k` classes.
    pub fn dims(&self, d: usize, k: usize) -> Result<Vec<usize>> {
        let arch = self.architecture()?;
        let mut dims = match &self.hidden {
            Some(h) => {
                let mut v = vec![d];
                v.extend(h);
                v.push(k);
                v
            }
            None => arch.default_dims(d),
        };
        *dims.last_mut().expect("nonempty") = k;
        Ok(dims)
    }

    pub fn images_path(&self) -> PathBuf {
        self.data_dir.join(&self.images_file)
    }

    pub fn labels_path(&self) -> PathBuf {
        self.data_dir.join(&self.labels_file)
    }

    pub fn prepared_dir(&self) -> PathBuf {
        self.out_dir.join("prepared")
    }

    pub fn sweep_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.seeds.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.dims(400, 10).unwrap(), vec![400, 25, 10]);
        assert_eq!(c.learning_rate().unwrap(), 0.3);
        assert_eq!(c.sweep_seeds(), vec![0]);
    }

    #[test]
    fn toml_roundtrip_and_partial_files() {
        let c = ExperimentConfig {
            arch: "residual".into(),
            seeds: vec![1, 2],
            ..Default::default()
        };
        let back: ExperimentConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        let partial: ExperimentConfig =
            toml::from_str("epochs = 5\nsigmas = [0.0, 0.3, 0.4]").unwrap();
        assert_eq!(partial.epochs, 5);
        assert_eq!(partial.parts, 3);
        assert!(toml::from_str::<ExperimentConfig>("unknown = 1").is_err());
        assert_eq!(back.dims(784, 10).unwrap(), vec![784, 64, 64, 10]);
        assert_eq!(back.learning_rate().unwrap(), 0.05);
    }

    #[test]
    fn invalid_values() {
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.validation_fraction = 1.0));
        assert!(bad(|c| c.sigmas = vec![0.0]));
        assert!(bad(|c| c.epsilon_grid = vec![0.9]));
        assert!(bad(|c| c.arch = "cnn".into()));
        assert!(bad(|c| c.metric = "hinge".into()));
    }
}
