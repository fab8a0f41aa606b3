use nalgebra::{Cholesky, SymmetricEigen};

use super::{check_dim, Matrix, Objective, SmoothnessConstants, Vector};
use crate::error::{Error, Result};

/// `f(x) = ½xᵀAx − bᵀx` with `A` symmetric positive definite. Its third
/// derivative vanishes, so `M = 0`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    a: Matrix,
    b: Vector,
    constants: SmoothnessConstants,
}

impl QuadraticObjective {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let scale = a.norm().max(f64::MIN_POSITIVE);
        if (&a - a.transpose()).norm() > 1e-12 * scale {
            return Err(Error::Config("quadratic matrix is not symmetric".into()));
        }
        if Cholesky::new(a.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let eig = SymmetricEigen::new(a.clone()).eigenvalues;
        let mu = eig.min();
        let l = eig.max();
        let constants = SmoothnessConstants::new(mu, l.max(mu), 0.0, None)?;
        Ok(Self { a, b, constants })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn linear_term(&self) -> &Vector {
        &self.b
    }

    /// `A⁻¹b`.
    pub fn minimizer(&self) -> Vector {
        Cholesky::new(self.a.clone()).expect("checked at construction").solve(&self.b)
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(0.5 * x.dot(&(&self.a * x)) - self.b.dot(x))
    }

    fn gradient(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        Ok(&self.a * x - &self.b)
    }

    fn value_and_gradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        check_dim(self.dim(), x)?;
        let ax = &self.a * x;
        Ok((0.5 * x.dot(&ax) - self.b.dot(x), ax - &self.b))
    }

    fn hvp(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        check_dim(self.dim(), v)?;
        Ok(&self.a * v)
    }

    fn full_hessian(&self, x: &Vector) -> Option<Result<Matrix>> {
        Some(check_dim(self.dim(), x).map(|_| self.a.clone()))
    }

    fn constants(&self) -> SmoothnessConstants {
        self.constants
    }
}
