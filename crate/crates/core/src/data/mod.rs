//! Sparse datasets: LIBSVM parsing, summary statistics, and the on-disk
//! reference-solution cache.

mod cache;
mod libsvm;
mod stats;

pub use cache::{RefsolCache, CachedSolution, CACHE_FORMAT};
pub use libsvm::{parse_libsvm, parse_libsvm_with_dim, write_libsvm};
pub use stats::{dataset_stats, power_iteration, DatasetStats, PowerIteration};

use crate::error::{Error, Result};

/// Row-major sparse design matrix with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    n: usize,
    row_ptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    labels: Vec<f64>,
}

impl SparseDataset {
    /// Builds a dataset from per-row `(index, value)` lists. Indices must be
    /// strictly increasing within each row and below `n`.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>, labels: Vec<f64>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), got: labels.len() });
        }
        if rows.is_empty() || n == 0 {
            return Err(Error::Config("dataset must have at least one row and one feature".into()));
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.into_iter().enumerate() {
            let mut prev: Option<usize> = None;
            for (j, v) in row {
                if j >= n {
                    return Err(Error::Config(format!("row {i}: feature index {j} >= n = {n}")));
                }
                if prev.is_some_and(|p| p >= j) {
                    return Err(Error::Config(format!("row {i}: indices not strictly increasing")));
                }
                if !v.is_finite() {
                    return Err(Error::NonFinite("feature value"));
                }
                prev = Some(j);
                indices.push(j);
                values.push(v);
            }
            row_ptr.push(indices.len());
        }
        for &b in &labels {
            if b != 1.0 && b != -1.0 {
                return Err(Error::Config(format!("label {b} is not ±1")));
            }
        }
        Ok(Self { n, row_ptr, indices, values, labels })
    }

    pub fn n_features(&self) -> usize {
        self.n
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    /// `aᵢᵀv`.
    pub fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &a)| a * v[j]).sum()
    }

    /// `out += c·aᵢ`.
    pub fn row_axpy(&self, i: usize, c: f64, out: &mut [f64]) {
        let (idx, val) = self.row(i);
        for (&j, &a) in idx.iter().zip(val) {
            out[j] += c * a;
        }
    }

    /// Returns a copy with the feature dimension widened to `n`.
    pub fn with_dim(mut self, n: usize) -> Result<Self> {
        if let Some(&max) = self.indices.iter().max() {
            if max >= n {
                return Err(Error::Config(format!("dimension override {n} below max index {}", max + 1)));
            }
        }
        self.n = n;
        Ok(self)
    }

    /// Stable content digest covering dimension, labels, and every entry bit pattern.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        h.update((self.labels.len() as u64).to_le_bytes());
        for &b in &self.labels {
            h.update(b.to_bits().to_le_bytes());
        }
        for &p in &self.row_ptr {
            h.update((p as u64).to_le_bytes());
        }
        for &j in &self.indices {
            h.update((j as u64).to_le_bytes());
        }
        for &v in &self.values {
            h.update(v.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
