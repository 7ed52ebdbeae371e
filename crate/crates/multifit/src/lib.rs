//! File formats, configuration and the experiment pipeline around
//! `multifit-core`.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod svg;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
