use alloc::format;
use alloc::vec::Vec;

use super::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::matrix::{cholesky, solve_lower_in_place, Matrix};
use crate::synth::BlockPartition;

const UNIT_DIAGONAL_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-9;

/// Minimum eigenvalue accepted as positive definite after repair.
pub const PD_FLOOR: f64 = 1e-6;
/// Off-diagonal shrink factor used by [`psd_repair`].
pub const DEFAULT_REPAIR_SCALE: f64 = 0.9;
/// Maximum shrink rounds before [`psd_repair`] gives up.
pub const MAX_REPAIR_ROUNDS: usize = 50;

/// Block-diagonal symmetric matrix without any definiteness guarantee, e.g. a
/// raw pairwise correlation estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrices {
    partition: BlockPartition,
    blocks: Vec<Matrix>,
}

impl BlockMatrices {
    pub fn new(partition: BlockPartition, blocks: Vec<Matrix>) -> Result<Self> {
        if blocks.len() != partition.num_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for a partition with {}",
                blocks.len(),
                partition.num_blocks()
            )));
        }
        for (b, m) in blocks.iter().enumerate() {
            let size = partition.size(b);
            if m.rows() != size || m.cols() != size {
                return Err(Error::DimensionMismatch(format!(
                    "block {b} is {}x{}, expected {size}x{size}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { partition, blocks })
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &Matrix {
        &self.blocks[b]
    }

    /// Dense `n × n` matrix with zeros between blocks.
    pub fn to_dense(&self) -> Matrix {
        dense_from_blocks(&self.partition, &self.blocks)
    }

    /// Extracts the within-block entries of a dense matrix.
    pub fn from_dense(partition: BlockPartition, dense: &Matrix) -> Result<Self> {
        let n = partition.n();
        if dense.rows() != n || dense.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "dense matrix is {}x{}, partition covers {n} units",
                dense.rows(),
                dense.cols()
            )));
        }
        let blocks = (0..partition.num_blocks())
            .map(|b| {
                let off = partition.offset(b);
                let s = partition.size(b);
                Matrix::from_fn(s, s, |i, j| dense[(off + i, off + j)])
            })
            .collect();
        Self::new(partition, blocks)
    }
}

/// Block-diagonal unit-diagonal correlation matrix `Σ` with cached per-block
/// lower Cholesky factors `Σ_b = C_b C_bᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCovariance {
    partition: BlockPartition,
    blocks: Vec<Matrix>,
    chol: Vec<Matrix>,
}

impl BlockCovariance {
    /// Validates unit diagonal, symmetry and positive definiteness.
    pub fn new(partition: BlockPartition, blocks: Vec<Matrix>) -> Result<Self> {
        let raw = BlockMatrices::new(partition, blocks)?;
        Self::try_from(raw)
    }

    /// `Σ = I` with every unit in its own block.
    pub fn identity(n: usize) -> Self {
        let partition = BlockPartition::singletons(n);
        let blocks: Vec<Matrix> = (0..n).map(|_| Matrix::identity(1)).collect();
        let chol = blocks.clone();
        Self { partition, blocks, chol }
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, b: usize) -> &Matrix {
        &self.blocks[b]
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn cholesky_factor(&self, b: usize) -> &Matrix {
        &self.chol[b]
    }

    pub fn to_dense(&self) -> Matrix {
        dense_from_blocks(&self.partition, &self.blocks)
    }

    pub fn to_block_matrices(&self) -> BlockMatrices {
        BlockMatrices { partition: self.partition.clone(), blocks: self.blocks.clone() }
    }

    /// Whitening operator `W = C⁻¹` applied blockwise, so that `W Σ Wᵀ = I`.
    pub fn whitener(&self) -> Whitener<'_> {
        Whitener { sigma: self }
    }

    /// Fills `out` with `C ζ` for i.i.d. standard normal `ζ`, i.e. a draw
    /// from `N_n(0, Σ)`; `out` holds `ζ` on entry.
    pub fn color_in_place(&self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n());
        for (b, c) in self.chol.iter().enumerate() {
            let seg = &mut out[self.partition.range(b)];
            let s = seg.len();
            if s == 1 {
                seg[0] *= c[(0, 0)];
                continue;
            }
            for i in (0..s).rev() {
                let mut acc = 0.0;
                for k in 0..=i {
                    acc += c[(i, k)] * seg[k];
                }
                seg[i] = acc;
            }
        }
    }
}

impl TryFrom<BlockMatrices> for BlockCovariance {
    type Error = Error;

    fn try_from(raw: BlockMatrices) -> Result<Self> {
        let mut chol = Vec::with_capacity(raw.blocks.len());
        for (b, m) in raw.blocks.iter().enumerate() {
            let asym = m.asymmetry();
            if asym > SYMMETRY_TOL {
                return Err(Error::NotSymmetric { asymmetry: asym });
            }
            for i in 0..m.rows() {
                if (m[(i, i)] - 1.0).abs() > UNIT_DIAGONAL_TOL {
                    return Err(Error::InvalidConfig(format!(
                        "block {b} has diagonal entry {} (must be 1)",
                        m[(i, i)]
                    )));
                }
            }
            chol.push(cholesky(m).ok_or(Error::NotPositiveDefinite { block: b })?);
        }
        Ok(Self { partition: raw.partition, blocks: raw.blocks, chol })
    }
}

/// Applies `W_b = C_b⁻¹` blockwise with one triangular solve per block.
#[derive(Debug, Clone, Copy)]
pub struct Whitener<'a> {
    sigma: &'a BlockCovariance,
}

impl Whitener<'_> {
    pub fn apply_in_place(&self, v: &mut [f64]) {
        let sigma = self.sigma;
        debug_assert_eq!(v.len(), sigma.n());
        for (b, c) in sigma.chol.iter().enumerate() {
            let seg = &mut v[sigma.partition.range(b)];
            if seg.len() == 1 {
                seg[0] /= c[(0, 0)];
            } else {
                solve_lower_in_place(c, seg);
            }
        }
    }

    /// Whitens every column of an `n × p` data matrix.
    pub fn apply_columns(&self, data: &Matrix) -> Matrix {
        let mut out = data.clone();
        for j in 0..out.cols() {
            self.apply_in_place(out.col_mut(j));
        }
        out
    }

    /// Dense `W_b` for block `b`.
    pub fn block_operator(&self, b: usize) -> Matrix {
        let c = &self.sigma.chol[b];
        let s = c.rows();
        let mut w = Matrix::identity(s);
        for j in 0..s {
            solve_lower_in_place(c, w.col_mut(j));
        }
        w
    }
}

/// Per-block `W_b` operators (see [`Whitener`]).
pub fn whitening_factor(sigma: &BlockCovariance) -> Vec<Matrix> {
    let w = sigma.whitener();
    (0..sigma.num_blocks()).map(|b| w.block_operator(b)).collect()
}

/// Repairs a raw block estimate into a positive definite correlation matrix.
///
/// Per block: negative eigenvalues are clipped to zero and the matrix rebuilt,
/// the diagonal is reset to one, and the off-diagonal entries are multiplied by
/// `scale` until the smallest eigenvalue reaches [`PD_FLOOR`]. Every block is
/// shrunk at least once.
pub fn psd_repair(raw: &BlockMatrices, scale: f64) -> Result<BlockCovariance> {
    if !(scale > 0.0 && scale < 1.0) {
        return Err(Error::InvalidConfig(format!("repair scale {scale} must lie in (0, 1)")));
    }
    let mut blocks = Vec::with_capacity(raw.blocks.len());
    for m in &raw.blocks {
        blocks.push(repair_block(m, scale)?);
    }
    BlockCovariance::new(raw.partition.clone(), blocks)
}

fn repair_block(m: &Matrix, scale: f64) -> Result<Matrix> {
    let n = m.rows();
    if n == 1 {
        return Ok(Matrix::identity(1));
    }
    let eig = symmetric_eigen(m)?;
    let mut out = if eig.min_value() < 0.0 {
        eig.reconstruct_with(|l| l.max(0.0))
    } else {
        m.clone()
    };
    for i in 0..n {
        out[(i, i)] = 1.0;
    }
    for _ in 0..MAX_REPAIR_ROUNDS {
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    out[(i, j)] *= scale;
                }
            }
        }
        // Average the two triangles so round-off never breaks symmetry.
        for j in 0..n {
            for i in (j + 1)..n {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        if symmetric_eigen(&out)?.min_value() >= PD_FLOOR {
            return Ok(out);
        }
    }
    Err(Error::RepairFailed { rounds: MAX_REPAIR_ROUNDS })
}

fn dense_from_blocks(partition: &BlockPartition, blocks: &[Matrix]) -> Matrix {
    let n = partition.n();
    let mut dense = Matrix::zeros(n, n);
    for (b, m) in blocks.iter().enumerate() {
        let off = partition.offset(b);
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                dense[(off + i, off + j)] = m[(i, j)];
            }
        }
    }
    dense
}
