//! Gaussian numerical kernels: normal and bivariate-normal distribution
//! functions, truncated sampling, symmetric eigen-decomposition, and the
//! block covariance type with its repair and whitening operations.

mod bvn;
mod covariance;
mod eigen;
mod gibbs;
mod normal;
mod truncnorm;

pub use bvn::{bvn_cdf, quadrant_prob};
pub(crate) use bvn::quadrant_prob_unchecked;
pub use covariance::{
    psd_repair, whitening_factor, BlockCovariance, BlockMatrices, Whitener, DEFAULT_REPAIR_SCALE,
    MAX_REPAIR_ROUNDS, PD_FLOOR,
};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use gibbs::{gibbs_truncated_mvn, TruncatedMvnGibbs, TruncationConstraints};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use truncnorm::{sample_truncated_normal, Side};
