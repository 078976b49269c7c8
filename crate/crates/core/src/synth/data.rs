use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `n × p` binary data, stored by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    n: usize,
    p: usize,
    data: Vec<u8>,
}

impl BinaryDataset {
    pub fn zeros(n: usize, p: usize) -> Self {
        Self { n, p, data: vec![0; n * p] }
    }

    /// Column-major values, each 0 or 1.
    pub fn from_col_major(n: usize, p: usize, data: Vec<u8>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::DimensionMismatch(format!("empty {n}x{p} dataset")));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n}x{p} dataset",
                data.len()
            )));
        }
        if let Some(&v) = data.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidConfig(format!("non-binary value {v}")));
        }
        Ok(Self { n, p, data })
    }

    pub fn from_rows(rows: &[&[u8]]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(n * p);
        for j in 0..p {
            data.extend(rows.iter().map(|r| r[j]));
        }
        Self::from_col_major(n, p, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.data[j * self.n + i] = u8::from(bit);
    }

    pub fn col(&self, j: usize) -> &[u8] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn col_mean(&self, j: usize) -> f64 {
        self.col(j).iter().map(|&v| f64::from(v)).sum::<f64>() / self.n as f64
    }

    /// `η = X β` for a `p × p` coefficient matrix (column `j` is `β_j`).
    pub fn linear_predictor(&self, beta: &Matrix) -> Result<Matrix> {
        if beta.rows() != self.p || beta.cols() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "β is {}x{}, data has {} variables",
                beta.rows(),
                beta.cols(),
                self.p
            )));
        }
        let mut eta = Matrix::zeros(self.n, self.p);
        for j in 0..self.p {
            let bj = beta.col(j);
            let out = eta.col_mut(j);
            for (k, &b) in bj.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (o, &x) in out.iter_mut().zip(self.col(k)) {
                    if x == 1 {
                        *o += b;
                    }
                }
            }
        }
        Ok(eta)
    }

    /// The data as `f64` (0.0 / 1.0).
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.p, |i, j| f64::from(self.get(i, j)))
    }
}

/// `n × p` latent utilities `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentDataset {
    z: Matrix,
}

impl LatentDataset {
    pub fn new(z: Matrix) -> Result<Self> {
        if z.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("latent data must be finite".into()));
        }
        Ok(Self { z })
    }

    pub fn n(&self) -> usize {
        self.z.rows()
    }

    pub fn p(&self) -> usize {
        self.z.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.z
    }

    pub fn into_matrix(self) -> Matrix {
        self.z
    }

    /// Indicator data `I(z > 0)`.
    pub fn threshold_at_zero(&self) -> BinaryDataset {
        let data = self.z.as_slice().iter().map(|&v| u8::from(v > 0.0)).collect();
        BinaryDataset { n: self.n(), p: self.p(), data }
    }
}
