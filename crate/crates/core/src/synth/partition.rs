use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};

/// Contiguous split of units `0..n` into blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockPartition {
    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidConfig("partition needs at least one block".into()));
        }
        if let Some(b) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidConfig(format!("block {b} is empty")));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &s in &sizes {
            acc += s;
            offsets.push(acc);
        }
        Ok(Self { sizes, offsets })
    }

    /// Every unit in its own block (`Σ = I`).
    pub fn singletons(n: usize) -> Self {
        Self { sizes: alloc::vec![1; n], offsets: (0..=n).collect() }
    }

    /// Random block sizes drawn uniformly from `min..=max`.
    ///
    /// When the remainder can no longer be split into two admissible blocks it
    /// becomes the last block, which may then exceed `max` by less than `min`.
    pub fn random<R: Rng + ?Sized>(n: usize, min: usize, max: usize, rng: &mut R) -> Result<Self> {
        if min == 0 || min > max {
            return Err(Error::InvalidConfig(format!("block size range {min}..={max}")));
        }
        if n < min {
            return Err(Error::InvalidConfig(format!(
                "{n} units cannot fill a block of at least {min}"
            )));
        }
        let mut sizes = Vec::new();
        let mut remaining = n;
        while remaining > 0 {
            if remaining <= max || remaining < 2 * min {
                sizes.push(remaining);
                break;
            }
            let hi = max.min(remaining - min);
            let s = rng.random_range(min..=hi);
            sizes.push(s);
            remaining -= s;
        }
        Self::from_sizes(sizes)
    }

    /// Total number of units.
    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, b: usize) -> usize {
        self.sizes[b]
    }

    pub fn offset(&self, b: usize) -> usize {
        self.offsets[b]
    }

    pub fn range(&self, b: usize) -> Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }

    /// Block containing unit `i`.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        if i >= self.n() {
            return None;
        }
        Some(self.offsets.partition_point(|&o| o <= i) - 1)
    }

    /// Number of within-block unordered pairs, `Σ_b n_b(n_b − 1)/2`.
    pub fn num_pairs(&self) -> usize {
        self.sizes.iter().map(|&s| s * (s - 1) / 2).sum()
    }
}
