use std::sync::atomic::{AtomicUsize, Ordering};

use super::{Matrix, Objective, SmoothnessConstants, Vector};
use crate::error::Result;

/// Evaluation tallies. A fused value-and-gradient call counts once in each.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub values: usize,
    pub gradients: usize,
    pub hvps: usize,
}

impl EvalCounts {
    pub fn total(&self) -> usize {
        self.values + self.gradients + self.hvps
    }
}

/// Wraps an objective and counts every evaluation made through it.
pub struct CountingObjective<'a> {
    inner: &'a dyn Objective,
    values: AtomicUsize,
    gradients: AtomicUsize,
    hvps: AtomicUsize,
}

impl<'a> CountingObjective<'a> {
    pub fn new(inner: &'a dyn Objective) -> Self {
        Self { inner, values: AtomicUsize::new(0), gradients: AtomicUsize::new(0), hvps: AtomicUsize::new(0) }
    }

    pub fn counts(&self) -> EvalCounts {
        EvalCounts {
            values: self.values.load(Ordering::Relaxed),
            gradients: self.gradients.load(Ordering::Relaxed),
            hvps: self.hvps.load(Ordering::Relaxed),
        }
    }
}

impl Objective for CountingObjective<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &Vector) -> Result<f64> {
        self.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }

    fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }

    fn value_and_gradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        self.values.fetch_add(1, Ordering::Relaxed);
        self.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.value_and_gradient(x)
    }

    fn hvp(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        self.hvps.fetch_add(1, Ordering::Relaxed);
        self.inner.hvp(x, v)
    }

    fn full_hessian(&self, x: &Vector) -> Option<Result<Matrix>> {
        self.inner.full_hessian(x)
    }

    fn constants(&self) -> SmoothnessConstants {
        self.inner.constants()
    }
}
