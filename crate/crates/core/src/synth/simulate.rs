use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::data::{BinaryDataset, LatentDataset};
use crate::error::{Error, Result};
use crate::gaussnum::BlockCovariance;
use crate::graphs::{topological_order, WeightedDag};
use crate::matrix::Matrix;

fn check_dims(wdag: &WeightedDag, sigma: &BlockCovariance) -> Result<()> {
    if wdag.p() == 0 || sigma.n() == 0 {
        return Err(Error::DimensionMismatch("empty graph or covariance".into()));
    }
    Ok(())
}

/// Fills `out` with one draw of `ε ~ N_n(0, Σ)`.
fn draw_errors<R: Rng + ?Sized>(sigma: &BlockCovariance, out: &mut [f64], rng: &mut R) {
    for e in out.iter_mut() {
        *e = StandardNormal.sample(rng);
    }
    sigma.color_in_place(out);
}

/// Simulates the latent-utility model: columns in topological order,
/// `Z_j = X β_j + ε_j` with `ε_j ~ N_n(0, Σ)` and `X_j = I(Z_j > 0)`.
pub fn simulate_data<R: Rng + ?Sized>(
    wdag: &WeightedDag,
    sigma: &BlockCovariance,
    rng: &mut R,
) -> Result<(BinaryDataset, LatentDataset)> {
    check_dims(wdag, sigma)?;
    let n = sigma.n();
    let p = wdag.p();
    let mut x = BinaryDataset::zeros(n, p);
    let mut z = Matrix::zeros(n, p);
    let mut eps = vec![0.0; n];
    for j in topological_order(wdag)? {
        draw_errors(sigma, &mut eps, rng);
        let parents = wdag.parents(j);
        for (i, &e) in eps.iter().enumerate() {
            let mut eta = 0.0;
            for &k in parents {
                if x.get(i, k) == 1 {
                    eta += wdag.weight(k, j);
                }
            }
            let zij = eta + e;
            z[(i, j)] = zij;
            x.set(i, j, zij > 0.0);
        }
    }
    Ok((x, LatentDataset::new(z)?))
}

/// Link function attached to one edge in the nonlinear simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// `β z`
    Linear,
    /// `(β z)²`
    Quadratic,
}

impl Link {
    #[inline]
    pub fn apply(self, beta: f64, z: f64) -> f64 {
        let v = beta * z;
        match self {
            Link::Linear => v,
            Link::Quadratic => v * v,
        }
    }
}

/// Per-edge link choices, keyed by `(parent, child)`.
pub type EdgeLinks = BTreeMap<(usize, usize), Link>;

/// Each edge is quadratic with probability 1/2, fixed for the whole dataset.
pub fn sample_links<R: Rng + ?Sized>(wdag: &WeightedDag, rng: &mut R) -> EdgeLinks {
    wdag.edges()
        .into_iter()
        .map(|e| (e, if rng.random_bool(0.5) { Link::Quadratic } else { Link::Linear }))
        .collect()
}

/// Cut-off turning latent columns into binary ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NonlinearThreshold {
    /// Empirical median of each latent column.
    #[default]
    Median,
    Zero,
}

/// Nonlinear variant: parents act through their latent values,
/// `z_ij = Σ_k f_kj(z_ik) + ε_ij`, and `x_ij = I(z_ij > c_j)`.
pub fn simulate_nonlinear<R: Rng + ?Sized>(
    wdag: &WeightedDag,
    links: &EdgeLinks,
    sigma: &BlockCovariance,
    threshold: NonlinearThreshold,
    rng: &mut R,
) -> Result<BinaryDataset> {
    check_dims(wdag, sigma)?;
    let n = sigma.n();
    let p = wdag.p();
    let mut x = BinaryDataset::zeros(n, p);
    let mut z = Matrix::zeros(n, p);
    let mut eps = vec![0.0; n];
    for j in topological_order(wdag)? {
        draw_errors(sigma, &mut eps, rng);
        let parents = wdag.parents(j);
        let mut fs = Vec::with_capacity(parents.len());
        for &k in parents {
            let link = *links
                .get(&(k, j))
                .ok_or_else(|| Error::MissingInput(format!("no link for edge {k} -> {j}")))?;
            fs.push((k, link, wdag.weight(k, j)));
        }
        for (i, &e) in eps.iter().enumerate() {
            let mut acc = 0.0;
            for &(k, link, beta) in &fs {
                acc += link.apply(beta, z[(i, k)]);
            }
            z[(i, j)] = acc + e;
        }
        let cut = match threshold {
            NonlinearThreshold::Zero => 0.0,
            NonlinearThreshold::Median => median(z.col(j)),
        };
        for i in 0..n {
            x.set(i, j, z[(i, j)] > cut);
        }
    }
    Ok(x)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
