//! Causal structure learning on dependent binary data.
//!
//! Binary observations `x_ij` are modelled through latent utilities
//! `z_ij = x_i β_j + ε_ij` with `x_ij = I(z_ij > 0)`, where the error column
//! `ε_j` is shared-covariance Gaussian across units, `ε_j ~ N_n(0, Σ)`, and
//! `Σ` is block diagonal with unit diagonal. The pipeline is:
//!
//! 1. [`covest`] estimates the within-block correlations of `Σ` by pairwise
//!    bivariate-normal maximum likelihood and repairs the result to be
//!    positive definite.
//! 2. [`decorr`] runs an EM-style loop: truncated-normal Gibbs imputation of
//!    the errors, Cholesky whitening of the latent data, and support-restricted
//!    ridge refits of `β`. Each iteration yields a decorrelated dataset.
//! 3. [`pclearn`] runs the PC algorithm on the decorrelated datasets and
//!    aggregates the results (consensus or average), with learning on the raw
//!    binary data as the baseline.
//!
//! [`synth`] simulates data from the model and [`experiment`] wires the whole
//! simulation study together. The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod covest;
pub mod decorr;
pub mod error;
pub mod experiment;
pub mod gaussnum;
pub mod graphs;
pub mod matrix;
pub mod pclearn;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
