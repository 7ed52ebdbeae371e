//! Reading and writing IDX files and prepared datasets.
//!
//! A prepared dataset `<name>` is stored as two files: `<name>.inputs.idx`
//! (an `f64` matrix, see [`multifit_core::idx::encode_f64_matrix`]) and
//! `<name>.labels.idx` (an ordinary IDX label file).

use std::fs;
use std::path::{Path, PathBuf};

use multifit_core::dataset::{LabeledDataset, RawDataset, DIGIT_CLASSES};
use multifit_core::idx;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Load an image file and its label file. Errors name the offending file.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<RawDataset> {
    let images = read_bytes(images_path)?;
    let labels = read_bytes(labels_path)?;
    let (count, rows, cols, pixels) =
        idx::decode_images(&images).map_err(|e| Error::in_file(images_path, e))?;
    let labels = idx::decode_labels(&labels).map_err(|e| Error::in_file(labels_path, e))?;
    if count != labels.len() {
        return Err(Error::Core(multifit_core::Error::Inconsistent(format!(
            "{} holds {count} images but {} holds {} labels",
            images_path.display(),
            labels_path.display(),
            labels.len()
        ))));
    }
    Ok(RawDataset::new(
        rows,
        cols,
        pixels.to_vec(),
        labels.to_vec(),
    )?)
}

pub fn inputs_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.inputs.idx"))
}

pub fn labels_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.labels.idx"))
}

/// Encoded input and label files of a dataset.
pub fn encode_dataset(data: &LabeledDataset) -> Result<(Vec<u8>, Vec<u8>)> {
    let labels: Vec<u8> = data
        .labels()
        .into_iter()
        .map(|l| {
            u8::try_from(l).map_err(|_| Error::Config(format!("label {l} does not fit a byte")))
        })
        .collect::<Result<_>>()?;
    Ok((
        idx::encode_f64_matrix(data.inputs()),
        idx::encode_labels(&labels),
    ))
}

/// Writes the dataset files and returns their SHA-256 digests.
pub fn write_dataset(dir: &Path, name: &str, data: &LabeledDataset) -> Result<(String, String)> {
    let (inputs, labels) = encode_dataset(data)?;
    write_bytes(&inputs_path(dir, name), &inputs)?;
    write_bytes(&labels_path(dir, name), &labels)?;
    Ok((sha256_hex(&inputs), sha256_hex(&labels)))
}

pub fn read_dataset(dir: &Path, name: &str, source_sigma: f64) -> Result<LabeledDataset> {
    let ip = inputs_path(dir, name);
    let lp = labels_path(dir, name);
    let inputs = idx::decode_f64_matrix(&read_bytes(&ip)?).map_err(|e| Error::in_file(&ip, e))?;
    let labels = read_bytes(&lp)?;
    let labels: Vec<usize> = idx::decode_labels(&labels)
        .map_err(|e| Error::in_file(&lp, e))?
        .iter()
        .map(|&l| usize::from(l))
        .collect();
    let data = LabeledDataset::from_labels(name, inputs, &labels, DIGIT_CLASSES)
        .map_err(|e| Error::in_file(&ip, e))?;
    Ok(data.with_source_sigma(source_sigma))
}
