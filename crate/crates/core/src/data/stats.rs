use super::SparseDataset;

pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITERS: usize = 5000;

/// Outcome of a power iteration. `converged == false` means the last
/// Rayleigh quotient is reported as a best estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    /// Largest Euclidean row norm.
    pub max_row_norm: f64,
    /// Top eigenvalue of the Gram operator `v ↦ Σ (aᵢᵀv) aᵢ`.
    pub gram: PowerIteration,
}

/// Power iteration for a symmetric PSD operator, started from the normalized
/// all-ones vector.
pub fn power_iteration<F>(n: usize, apply: F, tol: f64, max_iters: usize) -> PowerIteration
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for it in 1..=max_iters {
        w.iter_mut().for_each(|x| *x = 0.0);
        apply(&v, &mut w);
        let rq: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return PowerIteration { lambda: 0.0, iterations: it, converged: true };
        }
        let done = it > 1 && (rq - lambda).abs() <= tol * rq.abs();
        lambda = rq;
        if done {
            return PowerIteration { lambda, iterations: it, converged: true };
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    log::warn!("power iteration stopped after {max_iters} iterations without converging (λ ≈ {lambda:e})");
    PowerIteration { lambda, iterations: max_iters, converged: false }
}

pub fn dataset_stats(ds: &SparseDataset) -> DatasetStats {
    let max_row_norm = (0..ds.n_samples())
        .map(|i| ds.row(i).1.iter().map(|a| a * a).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let gram = power_iteration(
        ds.n_features(),
        |v, out| {
            for i in 0..ds.n_samples() {
                let c = ds.row_dot(i, v);
                ds.row_axpy(i, c, out);
            }
        },
        POWER_TOL,
        POWER_MAX_ITERS,
    );
    DatasetStats { max_row_norm, gram }
}
