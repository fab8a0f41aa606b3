use super::{check_dim, Matrix, Objective, SmoothnessConstants, Vector};
use crate::data::{dataset_stats, DatasetStats, SparseDataset};
use crate::error::Result;

/// `ln(1 + eᵘ)` without overflow.
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Logistic-regression constants for a dataset: `M = A√m/2` with `A` the
/// largest row norm, `L = λmax(Σ aᵢaᵢᵀ)/(4m) + 1/m`, `μ = 1/m`.
pub fn logistic_constants(ds: &SparseDataset) -> Result<(SmoothnessConstants, DatasetStats)> {
    let stats = dataset_stats(ds);
    let m = ds.n_samples() as f64;
    let c = SmoothnessConstants::new(
        1.0 / m,
        stats.gram.lambda / (4.0 * m) + 1.0 / m,
        stats.max_row_norm * m.sqrt() / 2.0,
        None,
    )?;
    Ok((c, stats))
}

/// `f(x) = (1/m) Σ ln(1 + exp(−bᵢaᵢᵀx)) + ‖x‖²/(2m)`.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    data: SparseDataset,
    constants: SmoothnessConstants,
    stats: Option<DatasetStats>,
}

impl LogisticObjective {
    pub fn new(data: SparseDataset) -> Result<Self> {
        let (constants, stats) = logistic_constants(&data)?;
        Ok(Self { data, constants, stats: Some(stats) })
    }

    /// Uses caller-supplied constants instead of computing them.
    pub fn with_constants(data: SparseDataset, constants: SmoothnessConstants) -> Self {
        Self { data, constants, stats: None }
    }

    pub fn dataset(&self) -> &SparseDataset {
        &self.data
    }

    pub fn stats(&self) -> Option<&DatasetStats> {
        self.stats.as_ref()
    }

    fn inv_m(&self) -> f64 {
        1.0 / self.data.n_samples() as f64
    }
}

impl Objective for LogisticObjective {
    fn dim(&self) -> usize {
        self.data.n_features()
    }

    fn value(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let xs = x.as_slice();
        let labels = self.data.labels();
        let loss: f64 = (0..self.data.n_samples()).map(|i| softplus(-labels[i] * self.data.row_dot(i, xs))).sum();
        Ok(self.inv_m() * (loss + 0.5 * x.norm_squared()))
    }

    fn gradient(&self, x: &Vector) -> Result<Vector> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        check_dim(self.dim(), x)?;
        let xs = x.as_slice();
        let labels = self.data.labels();
        let mut g = x.clone();
        let mut loss = 0.0;
        for i in 0..self.data.n_samples() {
            let u = -labels[i] * self.data.row_dot(i, xs);
            loss += softplus(u);
            self.data.row_axpy(i, -labels[i] * sigmoid(u), g.as_mut_slice());
        }
        let inv_m = self.inv_m();
        g *= inv_m;
        Ok((inv_m * (loss + 0.5 * x.norm_squared()), g))
    }

    fn hvp(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        check_dim(self.dim(), v)?;
        let (xs, vs) = (x.as_slice(), v.as_slice());
        let mut out = v.clone();
        for i in 0..self.data.n_samples() {
            let z = self.data.row_dot(i, xs);
            let w = sigmoid(z) * sigmoid(-z);
            self.data.row_axpy(i, w * self.data.row_dot(i, vs), out.as_mut_slice());
        }
        out *= self.inv_m();
        Ok(out)
    }

    fn full_hessian(&self, x: &Vector) -> Option<Result<Matrix>> {
        if let Err(e) = check_dim(self.dim(), x) {
            return Some(Err(e));
        }
        let n = self.dim();
        let mut h = Matrix::identity(n, n);
        for i in 0..self.data.n_samples() {
            let z = self.data.row_dot(i, x.as_slice());
            let w = sigmoid(z) * sigmoid(-z);
            let (idx, val) = self.data.row(i);
            for (&p, &ap) in idx.iter().zip(val) {
                for (&q, &aq) in idx.iter().zip(val) {
                    h[(p, q)] += w * ap * aq;
                }
            }
        }
        h *= self.inv_m();
        Some(Ok(h))
    }

    fn constants(&self) -> SmoothnessConstants {
        self.constants
    }
}
