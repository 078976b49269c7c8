use alloc::format;
use alloc::vec::Vec;
use core::cell::Cell;

// Supplies f64 math without std; redundant when std is linked in.
#[allow(unused_imports)]
use num_traits::Float;


use crate::error::{Error, Result};
use crate::gaussnum::std_normal_sf;
use crate::matrix::{inverse_spd, Matrix};
use crate::synth::BinaryDataset;

/// Which conditional-independence test the learner uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CiKind {
    /// Partial correlation with Fisher's z transform (continuous data).
    FisherZ,
    /// Likelihood-ratio G² test on contingency tables (binary data).
    GSquared,
}

/// Significance level and the largest conditioning set PC will try.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct CiParams {
    pub alpha: f64,
    pub max_cond: usize,
}

impl Default for CiParams {
    fn default() -> Self {
        Self { alpha: 0.05, max_cond: 3 }
    }
}

impl CiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha {} must lie in (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiTest {
    pub kind: CiKind,
    pub params: CiParams,
}

/// A conditional-independence test over a fixed dataset. Implement this to
/// plug a different test into [`pc`](super::pc).
pub trait CiTester {
    fn num_vars(&self) -> usize;
    fn num_samples(&self) -> usize;
    /// p-value for `X_i ⟂ X_j | X_S`; large values mean independence.
    fn p_value(&self, i: usize, j: usize, cond: &[usize]) -> f64;
}

/// Fisher-z test on a precomputed correlation matrix.
#[derive(Debug, Clone)]
pub struct FisherZ {
    n: usize,
    corr: Matrix,
    singular: Cell<usize>,
}

impl FisherZ {
    /// `data` is `n × p`, one variable per column.
    pub fn new(data: &Matrix) -> Self {
        let (n, p) = (data.rows(), data.cols());
        let mut centered = data.clone();
        let mut scale = alloc::vec![0.0; p];
        for (j, s) in scale.iter_mut().enumerate() {
            let col = centered.col_mut(j);
            let mean = col.iter().sum::<f64>() / n.max(1) as f64;
            col.iter_mut().for_each(|v| *v -= mean);
            let ss: f64 = col.iter().map(|v| v * v).sum();
            *s = if ss > 0.0 { 1.0 / ss.sqrt() } else { 0.0 };
        }
        let corr = Matrix::from_fn(p, p, |i, j| {
            if i == j {
                return 1.0;
            }
            let dot: f64 = centered.col(i).iter().zip(centered.col(j)).map(|(a, b)| a * b).sum();
            (dot * scale[i] * scale[j]).clamp(-1.0, 1.0)
        });
        Self { n, corr, singular: Cell::new(0) }
    }

    pub fn correlation(&self) -> &Matrix {
        &self.corr
    }

    /// Tests skipped because the conditioning correlation matrix was singular.
    pub fn singular_count(&self) -> usize {
        self.singular.get()
    }

    fn partial_correlation(&self, i: usize, j: usize, cond: &[usize]) -> Option<f64> {
        let c = &self.corr;
        match cond {
            [] => Some(c[(i, j)]),
            [k] => {
                let (rij, rik, rjk) = (c[(i, j)], c[(i, *k)], c[(j, *k)]);
                let d = (1.0 - rik * rik) * (1.0 - rjk * rjk);
                if d <= 1e-14 {
                    return None;
                }
                Some((rij - rik * rjk) / d.sqrt())
            }
            _ => {
                let idx: Vec<usize> = [i, j].into_iter().chain(cond.iter().copied()).collect();
                let sub = Matrix::from_fn(idx.len(), idx.len(), |a, b| c[(idx[a], idx[b])]);
                let prec = inverse_spd(&sub)?;
                let d = prec[(0, 0)] * prec[(1, 1)];
                if !(d > 0.0) || !d.is_finite() {
                    return None;
                }
                Some(-prec[(0, 1)] / d.sqrt())
            }
        }
    }
}

impl CiTester for FisherZ {
    fn num_vars(&self) -> usize {
        self.corr.cols()
    }

    fn num_samples(&self) -> usize {
        self.n
    }

    fn p_value(&self, i: usize, j: usize, cond: &[usize]) -> f64 {
        if self.n <= cond.len() + 3 {
            return 1.0;
        }
        let Some(r) = self.partial_correlation(i, j, cond) else {
            self.singular.set(self.singular.get() + 1);
            return 1.0;
        };
        if r.is_nan() {
            self.singular.set(self.singular.get() + 1);
            return 1.0;
        }
        let r = r.clamp(-1.0, 1.0);
        let z = ((self.n - cond.len() - 3) as f64).sqrt() * r.atanh();
        (2.0 * std_normal_sf(z.abs())).min(1.0)
    }
}

/// G² test for binary data. Tables averaging fewer than
/// [`GSquared::MIN_EXPECTED`] observations per cell are not tested (p = 1).
#[derive(Debug, Clone)]
pub struct GSquared<'a> {
    data: &'a BinaryDataset,
}

impl<'a> GSquared<'a> {
    pub const MIN_EXPECTED: f64 = 5.0;

    pub fn new(data: &'a BinaryDataset) -> Self {
        Self { data }
    }

    /// `(G², degrees of freedom)`, or `None` if the table is too sparse.
    pub fn statistic(&self, i: usize, j: usize, cond: &[usize]) -> Option<(f64, usize)> {
        let x = self.data;
        let n = x.n();
        let configs = 1usize << cond.len();
        if (n as f64) / ((4 * configs) as f64) < Self::MIN_EXPECTED {
            return None;
        }
        let mut counts = alloc::vec![0u32; 4 * configs];
        let (ci, cj) = (x.col(i), x.col(j));
        let conds: Vec<&[u8]> = cond.iter().map(|&k| x.col(k)).collect();
        for r in 0..n {
            let mut k = 0usize;
            for c in &conds {
                k = (k << 1) | usize::from(c[r]);
            }
            counts[4 * k + 2 * usize::from(ci[r]) + usize::from(cj[r])] += 1;
        }
        let mut g2 = 0.0;
        for k in 0..configs {
            let cell = &counts[4 * k..4 * k + 4];
            let nk = f64::from(cell.iter().sum::<u32>());
            if nk == 0.0 {
                continue;
            }
            let na = [f64::from(cell[0] + cell[1]), f64::from(cell[2] + cell[3])];
            let nb = [f64::from(cell[0] + cell[2]), f64::from(cell[1] + cell[3])];
            for a in 0..2 {
                for b in 0..2 {
                    let obs = f64::from(cell[2 * a + b]);
                    if obs > 0.0 {
                        g2 += obs * (obs * nk / (na[a] * nb[b])).ln();
                    }
                }
            }
        }
        Some(((2.0 * g2).max(0.0), configs))
    }
}

impl CiTester for GSquared<'_> {
    fn num_vars(&self) -> usize {
        self.data.p()
    }

    fn num_samples(&self) -> usize {
        self.data.n()
    }

    fn p_value(&self, i: usize, j: usize, cond: &[usize]) -> f64 {
        match self.statistic(i, j, cond) {
            Some((g2, df)) => chi_square_sf(g2, df),
            None => 1.0,
        }
    }
}

/// Fisher-z p-value for columns `i`, `j` of `data` given `cond`.
pub fn ci_fisher_z(data: &Matrix, i: usize, j: usize, cond: &[usize]) -> f64 {
    FisherZ::new(data).p_value(i, j, cond)
}

/// G² p-value for columns `i`, `j` of `data` given `cond`.
pub fn ci_g_squared(data: &BinaryDataset, i: usize, j: usize, cond: &[usize]) -> f64 {
    GSquared::new(data).p_value(i, j, cond)
}

/// Upper tail of the χ² distribution with integer degrees of freedom, from
/// the closed forms of the regularized incomplete gamma function at integer
/// and half-integer shape.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if !(x > 0.0) {
        return 1.0;
    }
    let h = 0.5 * x;
    let e = (-h).exp();
    let tail = if df % 2 == 0 {
        // e^{−h} Σ_{i<df/2} h^i / i!
        let mut term = 1.0;
        let mut sum = 1.0;
        for i in 1..df / 2 {
            term *= h / i as f64;
            sum += term;
        }
        e * sum
    } else {
        // erfc(√h) + e^{−h} Σ_{i=1}^{(df−1)/2} h^{i−1/2} / Γ(i + 1/2)
        let mut term = h.sqrt() / (0.5 * core::f64::consts::PI.sqrt());
        let mut sum = 0.0;
        for i in 1..=(df - 1) / 2 {
            sum += term;
            term *= h / (i as f64 + 0.5);
        }
        libm::erfc(h.sqrt()) + e * sum
    };
    tail.clamp(0.0, 1.0)
}
