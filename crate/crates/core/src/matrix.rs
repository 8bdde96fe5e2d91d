//! Dense square matrices with entrywise-nonnegative finite entries.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Dense row-major `n x n` matrix whose entries are finite and `>= 0`.
///
/// The invariant is checked once at construction; every operation in this
/// crate that returns a `NonnegMatrix` preserves it by construction.
/// Serialized as a list of rows.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct NonnegMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl NonnegMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some((k, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(invalid(format!(
                "entry ({}, {}) = {v} is not a finite nonnegative real",
                k / dim,
                k % dim
            )));
        }
        // -0.0 and 0.0 must hash and compare identically in set dedup
        let data = data.into_iter().map(|v| v + 0.0).collect();
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(invalid(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Caller guarantees the invariant.
    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        debug_assert!(data.iter().all(|v| v.is_finite() && *v >= 0.0));
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(dim, vec![0.0; dim * dim])
    }

    pub fn ones(dim: usize) -> Self {
        Self::from_raw(dim, vec![1.0; dim * dim])
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut data = vec![0.0; dim * dim];
        for (i, v) in values.iter().enumerate() {
            data[i * dim + i] = *v;
        }
        Self::new(dim, data)
    }

    /// Matrix unit `E_ij` (zero-based indices).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[i * dim + j] = 1.0;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Ordinary matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Self::from_raw(n, out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_raw(self.dim, data))
    }

    /// Multiplies every entry by `c >= 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(invalid(format!("scale factor {c} must be finite and >= 0")));
        }
        Ok(self.map(|v| v * c))
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.data[i * n + j];
            }
        }
        Self::from_raw(n, out)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..i).all(|j| self.data[i * n + j] == self.data[j * n + i]))
    }

    /// Maximum row sum, i.e. the operator norm induced by the max-norm.
    pub fn row_sum_norm(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `self <= other` entrywise.
    pub fn le_entrywise(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }

    /// Largest entrywise violation of `self <= other`, measured relative to
    /// `max(1, |other_ij|)`. Zero when the order holds exactly.
    pub fn entrywise_excess(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).max(0.0) / b.max(1.0))
            .fold(0.0, f64::max))
    }

    /// `|a_ij - b_ij| <= tol * max(1, |a_ij|, |b_ij|)` for all entries.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).abs() <= tol * a.max(*b).max(1.0))
    }

    /// Lexicographic order on row-major entries (dimension first).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.dim.cmp(&other.dim).then_with(|| {
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl fmt::Debug for NonnegMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for NonnegMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<NonnegMatrix> for Vec<Vec<f64>> {
    fn from(a: NonnegMatrix) -> Self {
        a.to_rows()
    }
}
