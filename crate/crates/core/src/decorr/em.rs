use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::ParentSets;
use crate::error::{Error, Result};
use crate::gaussnum::{BlockCovariance, Side, TruncatedMvnGibbs, TruncationConstraints, Whitener};
use crate::matrix::{solve_spd, Matrix};
use crate::rng::{tag, RngStreams};
use crate::synth::BinaryDataset;

/// Iterations used by [`fit_initial_beta`].
pub const INITIAL_FIT_ITERS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct EmConfig {
    pub max_iters: usize,
    /// Stop once `‖β⁽ᵗ⁺¹⁾ − β⁽ᵗ⁾‖_F / ‖β⁽ᵗ⁾‖_F` falls below this.
    pub tol: f64,
    /// Ridge penalty.
    pub lambda: f64,
    pub n_burn: usize,
    pub n_draws: usize,
    /// Number of decorrelated datasets to keep (the last iterations').
    pub num_datasets: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self { max_iters: 30, tol: 1e-3, lambda: 1.0, n_burn: 50, n_draws: 200, num_datasets: 10 }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive and finite");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative and finite");
        }
        if self.n_draws == 0 {
            return bad("n_draws must be positive");
        }
        if self.num_datasets == 0 || self.num_datasets > self.max_iters {
            return Err(Error::InvalidConfig(format!(
                "num_datasets must be in 1..={}, got {}",
                self.max_iters, self.num_datasets
            )));
        }
        Ok(())
    }
}

/// Result of [`run_em`].
#[derive(Debug, Clone)]
pub struct EmState {
    /// `p × p`; column `j` is supported on the parents of `j`.
    pub beta: Matrix,
    /// Latest averaged error draws `ε̄`.
    pub eps_bar: Matrix,
    /// Latest latent data `Z = Xβ + ε̄`.
    pub z: Matrix,
    /// Latest whitened latent data `W·Z`.
    pub wz: Matrix,
    /// Whitened datasets from the final iterations, oldest first.
    pub datasets: Vec<Matrix>,
    /// `‖β⁽ᵗ⁺¹⁾ − β⁽ᵗ⁾‖_F` for every iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn check_parents(p: usize, parents: &ParentSets) -> Result<()> {
    if parents.len() != p {
        return Err(Error::DimensionMismatch(format!("{} parent sets for {p} variables", parents.len())));
    }
    for (j, ps) in parents.iter().enumerate() {
        if ps.iter().any(|&k| k >= p || k == j) {
            return Err(Error::InvalidConfig(format!("invalid parent set for node {j}")));
        }
    }
    Ok(())
}

fn check_sigma(x: &BinaryDataset, sigma: &BlockCovariance) -> Result<()> {
    if sigma.n() != x.n() {
        return Err(Error::DimensionMismatch(format!("Σ has {} units, data has {}", sigma.n(), x.n())));
    }
    Ok(())
}

/// E-step: averaged truncated-normal error draws and the implied latent data.
///
/// Block `b` of column `j` in iteration `iteration` draws from the stream
/// keyed `[iteration, j, b]` of `streams`.
pub fn e_step(
    x: &BinaryDataset,
    beta: &Matrix,
    sigma: &BlockCovariance,
    n_burn: usize,
    n_draws: usize,
    streams: &RngStreams,
    iteration: u64,
) -> Result<(Matrix, Matrix)> {
    check_sigma(x, sigma)?;
    let samplers = sigma.blocks().iter().map(TruncatedMvnGibbs::new).collect::<Result<Vec<_>>>()?;
    e_step_with(x, beta, sigma, &samplers, n_burn, n_draws, streams, iteration)
}

#[allow(clippy::too_many_arguments)]
fn e_step_with(
    x: &BinaryDataset,
    beta: &Matrix,
    sigma: &BlockCovariance,
    samplers: &[TruncatedMvnGibbs],
    n_burn: usize,
    n_draws: usize,
    streams: &RngStreams,
    iteration: u64,
) -> Result<(Matrix, Matrix)> {
    let eta = x.linear_predictor(beta)?;
    let (n, p) = (x.n(), x.p());
    let partition = sigma.partition();
    let mut eps = Matrix::zeros(n, p);
    for j in 0..p {
        let eta_j = eta.col(j);
        let x_j = x.col(j);
        let out = eps.col_mut(j);
        for (b, sampler) in samplers.iter().enumerate() {
            let range = partition.range(b);
            let thresholds = eta_j[range.clone()].iter().map(|&e| -e).collect();
            let sides = x_j[range.clone()].iter().map(|&v| Side::from_bit(v)).collect();
            let constraints = TruncationConstraints::new(thresholds, sides)?;
            let mut rng = streams.stream(&[iteration, j as u64, b as u64]);
            sampler.mean_into(&constraints, n_burn, n_draws, &mut rng, &mut out[range])?;
        }
    }
    let mut z = eta;
    for (zv, &e) in z.as_mut_slice().iter_mut().zip(eps.as_slice()) {
        *zv += e;
    }
    Ok((eps, z))
}

/// M-step: support-restricted ridge regressions of `W·Z_j` on `W·X_{PA_j}`.
pub fn m_step(
    z: &Matrix,
    x: &BinaryDataset,
    whitener: &Whitener<'_>,
    parents: &ParentSets,
    lambda: f64,
) -> Result<Matrix> {
    if z.rows() != x.n() || z.cols() != x.p() {
        return Err(Error::DimensionMismatch(format!(
            "Z is {}x{}, data is {}x{}",
            z.rows(),
            z.cols(),
            x.n(),
            x.p()
        )));
    }
    check_parents(x.p(), parents)?;
    let wx = whitener.apply_columns(&x.to_matrix());
    let wz = whitener.apply_columns(z);
    ridge_fit(&wz, &wx, parents, lambda)
}

fn ridge_fit(wz: &Matrix, wx: &Matrix, parents: &ParentSets, lambda: f64) -> Result<Matrix> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!("ridge penalty must be non-negative, got {lambda}")));
    }
    let p = wz.cols();
    let mut beta = Matrix::zeros(p, p);
    for (j, pa) in parents.iter().enumerate() {
        if pa.is_empty() {
            continue;
        }
        let k = pa.len();
        let mut gram = Matrix::zeros(k, k);
        let mut rhs = vec![0.0; k];
        for (a, &pa_a) in pa.iter().enumerate() {
            let ca = wx.col(pa_a);
            rhs[a] = dot(ca, wz.col(j));
            for (b, &pa_b) in pa.iter().enumerate().take(a + 1) {
                let v = dot(ca, wx.col(pa_b));
                gram[(a, b)] = v;
                gram[(b, a)] = v;
            }
            gram[(a, a)] += lambda;
        }
        let coef = solve_spd(&gram, &rhs).ok_or(Error::SingularDesign { node: j })?;
        for (&pa_a, c) in pa.iter().zip(coef) {
            beta[(pa_a, j)] = c;
        }
    }
    Ok(beta)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The EM-style decorrelation loop, starting from `beta0`.
///
/// Iterates E-step → whitening → M-step until the relative change of `β`
/// drops below `config.tol` or `config.max_iters` is reached, keeping the
/// whitened latent data of the last `config.num_datasets` iterations. If the
/// loop stops early, extra E-steps at the final `β` fill up the collection.
/// Hitting `max_iters` is not an error; see [`EmState::converged`].
pub fn run_em(
    x: &BinaryDataset,
    sigma: &BlockCovariance,
    parents: &ParentSets,
    beta0: &Matrix,
    config: &EmConfig,
    streams: &RngStreams,
) -> Result<EmState> {
    config.validate()?;
    em_loop(x, sigma, parents, beta0, config, config.num_datasets, &streams.derive(&[tag::EM]))
}

/// Starting `β` for [`run_em`]: the same loop with `Σ = I` for
/// [`INITIAL_FIT_ITERS`] iterations from `β = 0`.
pub fn fit_initial_beta(
    x: &BinaryDataset,
    parents: &ParentSets,
    config: &EmConfig,
    streams: &RngStreams,
) -> Result<Matrix> {
    let config = EmConfig { max_iters: INITIAL_FIT_ITERS, num_datasets: 1, ..config.clone() };
    config.validate()?;
    let sigma = BlockCovariance::identity(x.n());
    let beta0 = Matrix::zeros(x.p(), x.p());
    let state = em_loop(x, &sigma, parents, &beta0, &config, 0, &streams.derive(&[tag::INIT_EM]))?;
    Ok(state.beta)
}

fn em_loop(
    x: &BinaryDataset,
    sigma: &BlockCovariance,
    parents: &ParentSets,
    beta0: &Matrix,
    config: &EmConfig,
    keep: usize,
    streams: &RngStreams,
) -> Result<EmState> {
    let (n, p) = (x.n(), x.p());
    check_sigma(x, sigma)?;
    check_parents(p, parents)?;
    if beta0.rows() != p || beta0.cols() != p {
        return Err(Error::DimensionMismatch(format!("β₀ is {}x{}, expected {p}x{p}", beta0.rows(), beta0.cols())));
    }
    let samplers = sigma.blocks().iter().map(TruncatedMvnGibbs::new).collect::<Result<Vec<_>>>()?;
    let whitener = sigma.whitener();
    let wx = whitener.apply_columns(&x.to_matrix());

    // Zero β outside the frozen supports so the invariant holds from the start.
    let mut beta = Matrix::zeros(p, p);
    for (j, pa) in parents.iter().enumerate() {
        for &k in pa {
            beta[(k, j)] = beta0[(k, j)];
        }
    }

    let mut state = EmState {
        beta: beta.clone(),
        eps_bar: Matrix::zeros(n, p),
        z: Matrix::zeros(n, p),
        wz: Matrix::zeros(n, p),
        datasets: Vec::new(),
        trace: Vec::new(),
        iterations: 0,
        converged: false,
    };
    let mut recent: VecDeque<Matrix> = VecDeque::with_capacity(keep + 1);
    let mut step = 0u64;

    for _ in 0..config.max_iters {
        let (eps, z) = e_step_with(x, &beta, sigma, &samplers, config.n_burn, config.n_draws, streams, step)?;
        step += 1;
        let wz = whitener.apply_columns(&z);
        let next = ridge_fit(&wz, &wx, parents, config.lambda)?;

        let old_norm = beta.frobenius_norm();
        let diff = frobenius_diff(&next, &beta);
        state.trace.push(diff);
        state.iterations += 1;
        beta = next;
        if keep > 0 {
            recent.push_back(wz.clone());
            if recent.len() > keep {
                recent.pop_front();
            }
        }
        state.eps_bar = eps;
        state.z = z;
        state.wz = wz;
        let converged = if old_norm > 0.0 { diff / old_norm < config.tol } else { diff == 0.0 };
        if converged {
            state.converged = true;
            break;
        }
    }

    while recent.len() < keep {
        let (eps, z) = e_step_with(x, &beta, sigma, &samplers, config.n_burn, config.n_draws, streams, step)?;
        step += 1;
        let wz = whitener.apply_columns(&z);
        recent.push_back(wz.clone());
        state.eps_bar = eps;
        state.z = z;
        state.wz = wz;
    }
    state.beta = beta;
    state.datasets = recent.into();
    Ok(state)
}

fn frobenius_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
