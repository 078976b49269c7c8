//! Pairwise maximum-likelihood estimation of the within-block correlations.
//!
//! For two units `a`, `b` of one block, every variable `j` contributes the
//! probability of the observed pair `(x_aj, x_bj)` under a standard bivariate
//! normal with correlation `ρ_ab`, given the thresholds `t_·j = −x_· β_j`.
//! The product over `j` is maximized in `ρ` one pair at a time; the assembled
//! blocks are then repaired to be positive definite.

use alloc::format;
use alloc::vec::Vec;

// Supplies f64 math without std; redundant when std is linked in.
#[allow(unused_imports)]
use num_traits::Float;


use crate::error::{Error, Result};
use crate::gaussnum::{
    psd_repair, quadrant_prob_unchecked, BlockCovariance, BlockMatrices, DEFAULT_REPAIR_SCALE,
};
use crate::matrix::Matrix;
use crate::synth::{BinaryDataset, BlockPartition};

/// Probabilities are floored here before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;
/// Estimates are clamped to `±RHO_BOUND`.
pub const RHO_BOUND: f64 = 0.999;
const GRID_POINTS: usize = 21;
const GRID_EDGE: f64 = 0.99;
const RHO_TOL: f64 = 1e-5;

/// Observed rows and thresholds of two units across the `p` variables.
#[derive(Debug, Clone, Copy)]
pub struct PairLikelihoodInput<'a> {
    pub xa: &'a [u8],
    pub xb: &'a [u8],
    pub ta: &'a [f64],
    pub tb: &'a [f64],
}

impl<'a> PairLikelihoodInput<'a> {
    pub fn new(xa: &'a [u8], xb: &'a [u8], ta: &'a [f64], tb: &'a [f64]) -> Result<Self> {
        let p = xa.len();
        if xb.len() != p || ta.len() != p || tb.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "pair rows of lengths {}, {}, {}, {}",
                xa.len(),
                xb.len(),
                ta.len(),
                tb.len()
            )));
        }
        if ta.iter().chain(tb).any(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig("thresholds must be finite".into()));
        }
        Ok(Self { xa, xb, ta, tb })
    }

    pub fn len(&self) -> usize {
        self.xa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xa.is_empty()
    }

    /// Same pair with the units swapped.
    pub fn swapped(&self) -> Self {
        Self { xa: self.xb, xb: self.xa, ta: self.tb, tb: self.ta }
    }

    fn loglik(&self, rho: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.xa.len() {
            let pr = quadrant_prob_unchecked((self.xa[j], self.xb[j]), (self.ta[j], self.tb[j]), rho);
            acc += pr.max(PROB_FLOOR).ln();
        }
        acc
    }
}

/// Pairwise log-likelihood of `ρ`.
pub fn pairwise_loglik(rho: f64, input: &PairLikelihoodInput<'_>) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::InvalidCorrelation(rho));
    }
    Ok(input.loglik(rho))
}

/// Maximizer of [`pairwise_loglik`] in `[−0.999, 0.999]`: a 21-point grid on
/// `[−0.99, 0.99]`, then Brent refinement between the neighbours of the best
/// grid point.
pub fn estimate_rho(input: &PairLikelihoodInput<'_>) -> Result<f64> {
    if input.is_empty() {
        return Err(Error::InvalidConfig("need at least one variable to estimate ρ".into()));
    }
    let step = 2.0 * GRID_EDGE / (GRID_POINTS - 1) as f64;
    let grid = |k: usize| -GRID_EDGE + step * k as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 0..GRID_POINTS {
        let v = input.loglik(grid(k));
        // Ties go to the point nearest zero, so flat likelihoods stay central.
        let better = v > best.1 || (v == best.1 && grid(k).abs() < grid(best.0).abs());
        if better {
            best = (k, v);
        }
    }
    let k = best.0;
    let lo = if k == 0 { -RHO_BOUND } else { grid(k - 1) };
    let hi = if k == GRID_POINTS - 1 { RHO_BOUND } else { grid(k + 1) };
    let (x, fx) = brent_max(|r| input.loglik(r), lo, hi, RHO_TOL);
    let rho = if fx >= best.1 { x } else { grid(k) };
    Ok(rho.clamp(-RHO_BOUND, RHO_BOUND))
}

/// Brent's derivative-free maximization on `[a, b]`.
fn brent_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let g = |x: f64| -f(x);
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = g(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let tol1 = tol * 0.5 + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = g(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, -fx)
}

/// Raw and repaired estimates of `Σ`.
#[derive(Debug, Clone)]
pub struct SigmaEstimate {
    /// Pairwise estimates before repair.
    pub raw: BlockMatrices,
    pub sigma: BlockCovariance,
    /// Number of pairs whose correlation was estimated.
    pub pair_count: usize,
}

/// Pairwise estimate of every within-block correlation, repaired with
/// [`psd_repair`].
pub fn estimate_sigma(
    x: &BinaryDataset,
    beta_hat: &Matrix,
    partition: &BlockPartition,
) -> Result<BlockCovariance> {
    Ok(estimate_sigma_detailed(x, beta_hat, partition)?.sigma)
}

pub fn estimate_sigma_detailed(
    x: &BinaryDataset,
    beta_hat: &Matrix,
    partition: &BlockPartition,
) -> Result<SigmaEstimate> {
    if partition.n() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} units, data has {}",
            partition.n(),
            x.n()
        )));
    }
    let eta = x.linear_predictor(beta_hat)?;
    let p = x.p();
    // Unit-major copies so each pair reads two contiguous rows.
    let rows_x: Vec<Vec<u8>> = (0..x.n()).map(|i| (0..p).map(|j| x.get(i, j)).collect()).collect();
    let rows_t: Vec<Vec<f64>> = (0..x.n()).map(|i| (0..p).map(|j| -eta[(i, j)]).collect()).collect();

    let mut blocks = Vec::with_capacity(partition.num_blocks());
    let mut pair_count = 0;
    for b in 0..partition.num_blocks() {
        let off = partition.offset(b);
        let s = partition.size(b);
        let mut m = Matrix::identity(s);
        for i in 0..s {
            for k in (i + 1)..s {
                let (ua, ub) = (off + i, off + k);
                let input = PairLikelihoodInput::new(&rows_x[ua], &rows_x[ub], &rows_t[ua], &rows_t[ub])?;
                let r = estimate_rho(&input)?;
                m[(i, k)] = r;
                m[(k, i)] = r;
                pair_count += 1;
            }
        }
        blocks.push(m);
    }
    let raw = BlockMatrices::new(partition.clone(), blocks)?;
    let sigma = psd_repair(&raw, DEFAULT_REPAIR_SCALE)?;
    Ok(SigmaEstimate { raw, sigma, pair_count })
}

/// Root mean squared error over the off-diagonal, within-block, nonzero
/// entries of `Σ*` (both triangles).
pub fn sigma_rmse(sigma_hat: &BlockCovariance, sigma_star: &BlockCovariance) -> Result<f64> {
    if sigma_hat.partition() != sigma_star.partition() {
        return Err(Error::DimensionMismatch("estimate and truth use different partitions".into()));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for b in 0..sigma_star.num_blocks() {
        let (h, s) = (sigma_hat.block(b), sigma_star.block(b));
        for j in 0..s.cols() {
            for i in 0..s.rows() {
                if i != j && s[(i, j)] != 0.0 {
                    let d = h[(i, j)] - s[(i, j)];
                    sum += d * d;
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyScoreSet);
    }
    Ok((sum / count as f64).sqrt())
}
