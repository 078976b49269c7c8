use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// Supplies f64 math without std; redundant when std is linked in.
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use super::truncnorm::{sample_truncated_normal, Side};
use crate::error::{Error, Result};
use crate::matrix::{inverse_spd, Matrix};

/// Orthant constraints for one block: `ε_i > t_i` or `ε_i ≤ t_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationConstraints {
    thresholds: Vec<f64>,
    sides: Vec<Side>,
}

impl TruncationConstraints {
    pub fn new(thresholds: Vec<f64>, sides: Vec<Side>) -> Result<Self> {
        if thresholds.len() != sides.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} thresholds but {} sides",
                thresholds.len(),
                sides.len()
            )));
        }
        if let Some(t) = thresholds.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite threshold {t}")));
        }
        Ok(Self { thresholds, sides })
    }

    /// Constraints implied by observed bits: `x = 1` means `ε > t`.
    pub fn from_bits(thresholds: Vec<f64>, bits: &[u8]) -> Result<Self> {
        Self::new(thresholds, bits.iter().map(|&b| Side::from_bit(b)).collect())
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn threshold(&self, i: usize) -> f64 {
        self.thresholds[i]
    }

    pub fn side(&self, i: usize) -> Side {
        self.sides[i]
    }

    /// Whether `eps` satisfies every constraint.
    pub fn satisfied_by(&self, eps: &[f64]) -> bool {
        eps.len() == self.len()
            && eps.iter().zip(&self.thresholds).zip(&self.sides).all(|((&e, &t), &s)| match s {
                Side::Greater => e > t,
                Side::LessEq => e <= t,
            })
    }
}

/// Gibbs sampler for `N(0, Σ_b)` restricted to an orthant, with the full
/// conditionals precomputed from `Θ = Σ_b⁻¹` so one sampler serves every
/// column that shares the block.
#[derive(Debug, Clone)]
pub struct TruncatedMvnGibbs {
    size: usize,
    /// `coef[(i, k)] = −Θ_ik / Θ_ii` for `k ≠ i`, zero on the diagonal.
    coef: Matrix,
    cond_sd: Vec<f64>,
    marginal_sd: Vec<f64>,
}

impl TruncatedMvnGibbs {
    pub fn new(sigma_block: &Matrix) -> Result<Self> {
        let size = sigma_block.rows();
        let theta = inverse_spd(sigma_block).ok_or(Error::NotPositiveDefinite { block: 0 })?;
        let mut coef = Matrix::zeros(size, size);
        let mut cond_sd = Vec::with_capacity(size);
        for i in 0..size {
            let tii = theta[(i, i)];
            for k in 0..size {
                if k != i {
                    // Stored transposed so row i's coefficients are a column.
                    coef[(k, i)] = -theta[(i, k)] / tii;
                }
            }
            cond_sd.push(1.0 / tii.sqrt());
        }
        let marginal_sd = (0..size).map(|i| sigma_block[(i, i)].sqrt()).collect();
        Ok(Self { size, coef, cond_sd, marginal_sd })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Writes the average of `n_draws` post-burn-in states into `mean`.
    pub fn mean_into<R: Rng + ?Sized>(
        &self,
        constraints: &TruncationConstraints,
        n_burn: usize,
        n_draws: usize,
        rng: &mut R,
        mean: &mut [f64],
    ) -> Result<()> {
        let s = self.size;
        if constraints.len() != s || mean.len() != s {
            return Err(Error::DimensionMismatch(format!(
                "block of size {s} with {} constraints and output length {}",
                constraints.len(),
                mean.len()
            )));
        }
        if n_draws == 0 {
            return Err(Error::InvalidConfig("Gibbs sampler needs at least one draw".into()));
        }
        mean.iter_mut().for_each(|m| *m = 0.0);
        let draw = |i: usize, m: f64, sd: f64, rng: &mut R| {
            sample_truncated_normal(m, sd, constraints.side(i), constraints.threshold(i), rng)
        };

        if s == 1 {
            // A single unit has no neighbours: every draw is already exact.
            for _ in 0..n_draws {
                mean[0] += draw(0, 0.0, self.cond_sd[0], rng);
            }
            mean[0] /= n_draws as f64;
            return Ok(());
        }

        let mut state: Vec<f64> = (0..s).map(|i| draw(i, 0.0, self.marginal_sd[i], rng)).collect();
        for sweep in 0..(n_burn + n_draws) {
            for i in 0..s {
                let c = self.coef.col(i);
                let mut m = 0.0;
                for k in 0..s {
                    m += c[k] * state[k];
                }
                state[i] = draw(i, m, self.cond_sd[i], rng);
            }
            if sweep >= n_burn {
                for (acc, &v) in mean.iter_mut().zip(&state) {
                    *acc += v;
                }
            }
        }
        let inv = 1.0 / n_draws as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        Ok(())
    }
}

/// Posterior mean of `ε ~ N(0, Σ_b)` under orthant constraints, estimated by
/// averaging `n_draws` Gibbs states after `n_burn` sweeps.
pub fn gibbs_truncated_mvn<R: Rng + ?Sized>(
    sigma_block: &Matrix,
    constraints: &TruncationConstraints,
    n_burn: usize,
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let sampler = TruncatedMvnGibbs::new(sigma_block)?;
    let mut mean = vec![0.0; sampler.size()];
    sampler.mean_into(constraints, n_burn, n_draws, rng, &mut mean)?;
    Ok(mean)
}
