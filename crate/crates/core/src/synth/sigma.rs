use alloc::format;
use alloc::vec::Vec;

// Supplies f64 math without std; redundant when std is linked in.
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use super::BlockPartition;
use crate::error::{Error, Result};
use crate::gaussnum::BlockCovariance;
use crate::matrix::Matrix;

/// Within-block correlation pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Structure {
    /// All pairs share one correlation `θ`.
    Equal,
    /// `Σ_ij = θ^{|i−j|/5}`.
    Toeplitz,
    /// Each block is Equal or Toeplitz with probability 1/2.
    Mixed,
}

/// Structure of a single generated block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockKind {
    Equal(f64),
    Toeplitz(f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SigmaSpec {
    pub structure: Structure,
    pub min_block: usize,
    pub max_block: usize,
    pub equal_theta: (f64, f64),
    pub toeplitz_theta: (f64, f64),
}

impl Default for SigmaSpec {
    fn default() -> Self {
        Self {
            structure: Structure::Mixed,
            min_block: 10,
            max_block: 15,
            equal_theta: (0.4, 0.7),
            toeplitz_theta: (0.1, 0.25),
        }
    }
}

impl SigmaSpec {
    pub fn with_structure(structure: Structure) -> Self {
        Self { structure, ..Self::default() }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > -1.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidCorrelation(theta))
    }
}

/// `size × size` block with unit diagonal and constant off-diagonal `θ`.
pub fn equal_block(size: usize, theta: f64) -> Result<Matrix> {
    check_theta(theta)?;
    Ok(Matrix::from_fn(size, size, |i, j| if i == j { 1.0 } else { theta }))
}

/// `size × size` block with `Σ_ij = θ^{|i−j|/5}`; needs `θ ∈ [0, 1)`.
pub fn toeplitz_block(size: usize, theta: f64) -> Result<Matrix> {
    check_theta(theta)?;
    if theta < 0.0 {
        return Err(Error::InvalidCorrelation(theta));
    }
    Ok(Matrix::from_fn(size, size, |i, j| {
        if i == j {
            1.0
        } else {
            theta.powf(i.abs_diff(j) as f64 / 5.0)
        }
    }))
}

/// Random block-diagonal `Σ*` over `n` units.
pub fn make_block_sigma<R: Rng + ?Sized>(
    n: usize,
    spec: &SigmaSpec,
    rng: &mut R,
) -> Result<(BlockCovariance, BlockPartition)> {
    let (sigma, _) = make_block_sigma_with_kinds(n, spec, rng)?;
    let partition = sigma.partition().clone();
    Ok((sigma, partition))
}

/// Like [`make_block_sigma`], also reporting each block's pattern.
pub fn make_block_sigma_with_kinds<R: Rng + ?Sized>(
    n: usize,
    spec: &SigmaSpec,
    rng: &mut R,
) -> Result<(BlockCovariance, Vec<BlockKind>)> {
    for &(lo, hi) in &[spec.equal_theta, spec.toeplitz_theta] {
        check_theta(lo)?;
        check_theta(hi)?;
        if lo > hi {
            return Err(Error::InvalidConfig(format!("empty θ range ({lo}, {hi})")));
        }
    }
    let partition = BlockPartition::random(n, spec.min_block, spec.max_block, rng)?;
    let mut blocks = Vec::with_capacity(partition.num_blocks());
    let mut kinds = Vec::with_capacity(partition.num_blocks());
    for &size in partition.sizes() {
        let equal = match spec.structure {
            Structure::Equal => true,
            Structure::Toeplitz => false,
            Structure::Mixed => rng.random_bool(0.5),
        };
        let draw = |(lo, hi): (f64, f64), rng: &mut R| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..hi)
            }
        };
        if equal {
            let theta = draw(spec.equal_theta, rng);
            blocks.push(equal_block(size, theta)?);
            kinds.push(BlockKind::Equal(theta));
        } else {
            let theta = draw(spec.toeplitz_theta, rng);
            blocks.push(toeplitz_block(size, theta)?);
            kinds.push(BlockKind::Toeplitz(theta));
        }
    }
    Ok((BlockCovariance::new(partition, blocks)?, kinds))
}
