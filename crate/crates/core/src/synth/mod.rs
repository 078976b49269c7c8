//! Block covariance generation and simulation of dependent binary data.

mod data;
mod partition;
mod sigma;
mod simulate;

pub use data::{BinaryDataset, LatentDataset};
pub use partition::BlockPartition;
pub use sigma::{
    equal_block, make_block_sigma, make_block_sigma_with_kinds, toeplitz_block, BlockKind,
    SigmaSpec, Structure,
};
pub use simulate::{
    sample_links, simulate_data, simulate_nonlinear, EdgeLinks, Link, NonlinearThreshold,
};
