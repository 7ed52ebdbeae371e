//! IDX container encoding and decoding over byte slices.
//!
//! Layouts (all integers big-endian):
//!
//! ```text
//! images  magic 2051 (0x00000803)  u32 count, u32 rows, u32 cols, count*rows*cols u8
//! labels  magic 2049 (0x00000801)  u32 count, count u8
//! matrix  magic 3586 (0x00000E02)  u32 rows, u32 cols, rows*cols f64
//! ```
//!
//! The `f64` matrix variant is the IDX "double, two dimensions" type and is
//! used for prepared (normalized, noise-augmented) inputs.

use alloc::format;
use alloc::vec::Vec;

use crate::dataset::RawDataset;
use crate::{Error, Matrix, Result};

pub const IMAGES_MAGIC: u32 = 2051;
pub const LABELS_MAGIC: u32 = 2049;
pub const F64_MATRIX_MAGIC: u32 = 0x0000_0E02;

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let chunk = bytes.get(offset..offset + 4).ok_or(Error::Truncated {
        expected: offset + 4,
        actual: bytes.len(),
    })?;
    Ok(u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]))
}

fn check_magic(bytes: &[u8], expected: u32, what: &str) -> Result<()> {
    let magic = read_u32(bytes, 0)?;
    if magic != expected {
        return Err(Error::Format(format!(
            "{what}: expected magic {expected}, found {magic}"
        )));
    }
    Ok(())
}

fn payload(bytes: &[u8], header: usize, len: usize) -> Result<&[u8]> {
    let end = header
        .checked_add(len)
        .ok_or_else(|| Error::Format("declared payload size overflows".into()))?;
    bytes.get(header..end).ok_or(Error::Truncated {
        expected: end,
        actual: bytes.len(),
    })
}

/// Decoded image stream: `(count, rows, cols, pixels)`.
pub fn decode_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8])> {
    check_magic(bytes, IMAGES_MAGIC, "image file")?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let len = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    Ok((count, rows, cols, payload(bytes, 16, len)?))
}

pub fn decode_labels(bytes: &[u8]) -> Result<&[u8]> {
    check_magic(bytes, LABELS_MAGIC, "label file")?;
    let count = read_u32(bytes, 4)? as usize;
    payload(bytes, 8, count)
}

/// Decode an image/label pair, cross-checking the counts.
pub fn decode_pair(images: &[u8], labels: &[u8]) -> Result<RawDataset> {
    let (count, rows, cols, pixels) = decode_images(images)?;
    let labels = decode_labels(labels)?;
    if labels.len() != count {
        return Err(Error::Inconsistent(format!(
            "{count} images but {} labels",
            labels.len()
        )));
    }
    RawDataset::new(rows, cols, pixels.to_vec(), labels.to_vec())
}

pub fn encode_images(raw: &RawDataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + raw.pixels().len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(raw.len() as u32).to_be_bytes());
    out.extend_from_slice(&(raw.image_rows() as u32).to_be_bytes());
    out.extend_from_slice(&(raw.image_cols() as u32).to_be_bytes());
    out.extend_from_slice(raw.pixels());
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn encode_f64_matrix(m: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * m.as_slice().len());
    out.extend_from_slice(&F64_MATRIX_MAGIC.to_be_bytes());
    out.extend_from_slice(&(m.rows() as u32).to_be_bytes());
    out.extend_from_slice(&(m.cols() as u32).to_be_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn decode_f64_matrix(bytes: &[u8]) -> Result<Matrix> {
    check_magic(bytes, F64_MATRIX_MAGIC, "matrix file")?;
    let rows = read_u32(bytes, 4)? as usize;
    let cols = read_u32(bytes, 8)? as usize;
    let len = rows
        .checked_mul(cols)
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| Error::Format("matrix dimensions overflow".into()))?;
    let body = payload(bytes, 12, len)?;
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_be_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]))
        .collect();
    Matrix::from_vec(rows, cols, data)
}
