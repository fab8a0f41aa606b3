//! Objective functions and their smoothness constants.

mod counting;
mod logistic;
mod quadratic;

pub use counting::{CountingObjective, EvalCounts};
pub use logistic::{logistic_constants, LogisticObjective};
pub use quadratic::QuadraticObjective;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Strong convexity `mu`, gradient Lipschitz modulus `l`, self-concordance
/// parameter `m`, and an optional Hessian Lipschitz modulus `l2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessConstants {
    pub mu: f64,
    pub l: f64,
    pub m: f64,
    pub l2: Option<f64>,
}

impl SmoothnessConstants {
    pub fn new(mu: f64, l: f64, m: f64, l2: Option<f64>) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain { name: "mu", value: mu, domain: "(0, ∞)" });
        }
        if !(l >= mu && l.is_finite()) {
            return Err(Error::Domain { name: "L", value: l, domain: "[mu, ∞)" });
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::Domain { name: "M", value: m, domain: "[0, ∞)" });
        }
        if let Some(l2) = l2 {
            if !(l2 > 0.0 && l2.is_finite()) {
                return Err(Error::Domain { name: "L2", value: l2, domain: "(0, ∞)" });
            }
        }
        Ok(Self { mu, l, m, l2 })
    }

    pub fn kappa(&self) -> f64 {
        self.l / self.mu
    }

    /// Hessian Lipschitz modulus; falls back to `2·M·L^{3/2}`, which every
    /// `M`-self-concordant, `L`-smooth function satisfies.
    pub fn hessian_lipschitz(&self) -> f64 {
        self.l2.unwrap_or(2.0 * self.m * self.l.powf(1.5))
    }

    /// `L₂ / (2 μ^{3/2})`.
    pub fn m_tilde(&self) -> f64 {
        self.hessian_lipschitz() / (2.0 * self.mu.powf(1.5))
    }
}

/// A twice-differentiable, strongly convex objective.
///
/// Implementations are immutable after construction and may be evaluated
/// concurrently.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> Result<f64>;

    fn gradient(&self, x: &Vector) -> Result<Vector>;

    fn value_and_gradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    /// `∇²f(x)·v`.
    fn hvp(&self, x: &Vector, v: &Vector) -> Result<Vector>;

    /// Dense Hessian, when the objective can form it.
    fn full_hessian(&self, _x: &Vector) -> Option<Result<Matrix>> {
        None
    }

    fn constants(&self) -> SmoothnessConstants;
}

pub(crate) fn check_dim(expected: usize, v: &Vector) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("input vector"));
    }
    Ok(())
}

/// `‖d‖ₓ = √(dᵀ∇²f(x)d)`.
pub fn weighted_norm(obj: &dyn Objective, x: &Vector, d: &Vector) -> Result<f64> {
    let q = d.dot(&obj.hvp(x, d)?);
    if !q.is_finite() {
        return Err(Error::NonFinite("weighted norm"));
    }
    if q <= 0.0 {
        return Err(Error::NonPositiveCurvature(q));
    }
    Ok(q.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_norm_diag() {
        let q = QuadraticObjective::new(Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 1.0])), Vector::zeros(2))
            .unwrap();
        let x = Vector::zeros(2);
        let d = Vector::from_vec(vec![1.0, 1.0]);
        assert!((weighted_norm(&q, &x, &d).unwrap() - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constants_validation() {
        assert!(SmoothnessConstants::new(0.0, 1.0, 0.0, None).is_err());
        assert!(SmoothnessConstants::new(2.0, 1.0, 0.0, None).is_err());
        assert!(SmoothnessConstants::new(1.0, 1.0, -1.0, None).is_err());
        assert!(SmoothnessConstants::new(1.0, 1.0, 0.0, Some(0.0)).is_err());
        let c = SmoothnessConstants::new(0.5, 2.0, 1.0, None).unwrap();
        assert_eq!(c.kappa(), 4.0);
        assert!((c.hessian_lipschitz() - 2.0 * 2f64.powf(1.5)).abs() < 1e-15);
    }
}
