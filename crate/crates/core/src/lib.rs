//! Multi-criteria machine training.
//!
//! Training a model on labeled data is treated as a vector optimization
//! problem: every sample contributes one criterion, the distance between the
//! model output and its label. The resulting data-fitting-error vector
//! ([`dfe::DfeVector`]) is minimized in the Pareto sense, and in practice via
//! linear scalarization ([`dfe::scalarize`]), optionally over several datasets
//! at once with per-dataset weights ([`dfe::ScalarizationWeights`]).
//!
//! The crate is `no_std` (it needs `alloc`) and contains only computation:
//!
//! - [`idx`], [`dataset`]: IDX decoding from byte slices, normalization,
//!   seeded splitting and Gaussian-noise augmentation.
//! - [`metric`], [`dfe`]: per-sample losses, DFE vectors, scalarization.
//! - [`stability`]: label and input perturbation bounds with their checks.
//! - [`pareto`]: brute-force efficiency analysis on finite point sets.
//! - [`synthetic`]: grid-based checks of the set-valued estimation and
//!   convergence results.
//! - [`network`], [`backprop`], [`train`]: dense and residual networks,
//!   exact gradients of the scalarized loss, seeded SGD.
//! - [`verification`]: randomized suites driving all of the above.
//!
//! File IO, configuration, reports and the command line live in the
//! `multifit` crate.
//!
//! # Randomness
//!
//! Every random draw goes through [`rng::Rng`], Marsaglia's XorShift128
//! generator (`rand_xorshift` 0.4) seeded with `rand_core`'s
//! `seed_from_u64`. Versions of the random crates are pinned exactly, since
//! the generator and sampling algorithms are part of the reproducibility
//! contract.

#![no_std]
// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod backprop;
pub mod dataset;
pub mod dfe;
pub mod error;
pub mod idx;
pub mod matrix;
pub mod metric;
pub mod network;
pub mod pareto;
pub mod rng;
pub mod stability;
pub mod synthetic;
pub mod train;
pub mod verification;

pub use error::{Error, Result};
pub use matrix::Matrix;
