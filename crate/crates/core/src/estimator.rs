//! BFGS Hessian approximation kept together with its inverse.

use nalgebra::{Cholesky, SymmetricEigen};

use crate::error::{Error, Result};
use crate::objective::{Matrix, Vector};

/// Relative curvature floor: updates with `yᵀs ≤ CURVATURE_FLOOR·‖y‖‖s‖` are refused.
pub const CURVATURE_FLOOR: f64 = 1e-12;

/// `B` and `H ≈ B⁻¹`, both updated by the rank-2 BFGS rule in O(n²).
#[derive(Debug, Clone, PartialEq)]
pub struct HessianEstimate {
    b: Matrix,
    h: Matrix,
}

fn symmetrize(m: &mut Matrix) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

impl HessianEstimate {
    /// `B = c·I`, `H = I/c`.
    pub fn scaled_identity(n: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain { name: "c", value: c, domain: "(0, ∞)" });
        }
        Ok(Self { b: Matrix::identity(n, n) * c, h: Matrix::identity(n, n) / c })
    }

    /// Starts from an explicit SPD matrix; the inverse is formed once by Cholesky.
    pub fn from_matrix(b: Matrix) -> Result<Self> {
        if b.nrows() != b.ncols() {
            return Err(Error::DimensionMismatch { expected: b.nrows(), got: b.ncols() });
        }
        let mut b = b;
        symmetrize(&mut b);
        let chol = Cholesky::new(b.clone()).ok_or(Error::NotPositiveDefinite)?;
        let mut h = chol.inverse();
        symmetrize(&mut h);
        Ok(Self { b, h })
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    /// Search direction `−H·g`.
    pub fn direction(&self, g: &Vector) -> Result<Vector> {
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: g.len() });
        }
        Ok(-(&self.h * g))
    }

    /// Applies the BFGS update for step `s` and gradient change `y`.
    pub fn update(&mut self, s: &Vector, y: &Vector) -> Result<()> {
        let n = self.dim();
        for v in [s, y] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        let ys = y.dot(s);
        let scale = y.norm() * s.norm();
        if !(ys > CURVATURE_FLOOR * scale) || scale == 0.0 {
            return Err(Error::CurvatureBreakdown { y_dot_s: ys, scale });
        }
        let rho = 1.0 / ys;

        let bs = &self.b * s;
        let sbs = s.dot(&bs);
        if !(sbs > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        self.b.ger(-1.0 / sbs, &bs, &bs, 1.0);
        self.b.ger(rho, y, y, 1.0);
        symmetrize(&mut self.b);

        // (I − ρsyᵀ)H(I − ρysᵀ) + ρssᵀ expanded with Hy.
        let hy = &self.h * y;
        let yhy = y.dot(&hy);
        self.h.ger(-rho, s, &hy, 1.0);
        self.h.ger(-rho, &hy, s, 1.0);
        self.h.ger(rho * rho * yhy + rho, s, s, 1.0);
        symmetrize(&mut self.h);
        Ok(())
    }

    /// `Ψ(B/c) = Tr(B)/c − ln det B + n ln c − n`, with the log-determinant
    /// taken from a Cholesky factor.
    pub fn potential(&self, c: f64) -> Result<f64> {
        if !(c > 0.0) {
            return Err(Error::Domain { name: "c", value: c, domain: "(0, ∞)" });
        }
        let n = self.dim() as f64;
        let logdet = log_det_spd(&self.b)?;
        Ok(self.b.trace() / c - logdet + n * c.ln() - n)
    }

    /// `Ψ(P^{-1/2} B P^{-1/2})` for an SPD matrix `P`.
    pub fn potential_star(&self, p: &Matrix) -> Result<f64> {
        if p.nrows() != self.dim() || p.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.nrows() });
        }
        let inv_sqrt = inverse_sqrt_spd(p)?;
        let mut scaled = &inv_sqrt * &self.b * &inv_sqrt;
        symmetrize(&mut scaled);
        let logdet = log_det_spd(&scaled)?;
        Ok(scaled.trace() - logdet - self.dim() as f64)
    }
}

pub(crate) fn log_det_spd(m: &Matrix) -> Result<f64> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    Ok(2.0 * (0..m.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>())
}

/// Symmetric inverse square root through an eigendecomposition.
pub fn inverse_sqrt_spd(p: &Matrix) -> Result<Matrix> {
    let eig = SymmetricEigen::new(p.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let q = &eig.eigenvectors;
    let mut out = q * Matrix::from_diagonal(&d) * q.transpose();
    symmetrize(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    fn diag(x: &[f64]) -> Matrix {
        Matrix::from_diagonal(&v(x))
    }

    #[test]
    fn scaled_identity() {
        let e = HessianEstimate::scaled_identity(3, 4.0).unwrap();
        assert_eq!(e.b(), &(Matrix::identity(3, 3) * 4.0));
        assert_eq!(e.h(), &(Matrix::identity(3, 3) * 0.25));
        assert!(HessianEstimate::scaled_identity(2, 0.0).is_err());
    }

    #[test]
    fn update_examples() {
        let mut e = HessianEstimate::scaled_identity(2, 1.0).unwrap();
        e.update(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert_eq!(e.b(), &Matrix::identity(2, 2));

        let mut e = HessianEstimate::scaled_identity(2, 1.0).unwrap();
        e.update(&v(&[1.0, 0.0]), &v(&[2.0, 0.0])).unwrap();
        assert_eq!(e.b(), &diag(&[2.0, 1.0]));

        let mut e = HessianEstimate::scaled_identity(2, 1.0).unwrap();
        e.update(&v(&[1.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert_eq!(e.b(), &Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));
        assert!((e.b() * e.h() - Matrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn curvature_breakdown() {
        let mut e = HessianEstimate::scaled_identity(2, 1.0).unwrap();
        let err = e.update(&v(&[1.0, 0.0]), &v(&[-1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::CurvatureBreakdown { .. }));
        assert!(e.update(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn direction_examples() {
        let e = HessianEstimate::scaled_identity(2, 1.0).unwrap();
        assert_eq!(e.direction(&v(&[1.0, 2.0])).unwrap(), v(&[-1.0, -2.0]));
        let e = HessianEstimate::from_matrix(diag(&[2.0, 1.0])).unwrap();
        assert!((e.direction(&v(&[2.0, 0.0])).unwrap() - v(&[-1.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn potential_examples() {
        let ln2 = std::f64::consts::LN_2;
        assert!(HessianEstimate::scaled_identity(2, 1.0).unwrap().potential(1.0).unwrap().abs() < 1e-15);
        let e = HessianEstimate::from_matrix(diag(&[2.0, 1.0])).unwrap();
        assert!((e.potential(1.0).unwrap() - (1.0 - ln2)).abs() < 1e-15);
        let e = HessianEstimate::scaled_identity(5, 2.0).unwrap();
        assert!((e.potential(1.0).unwrap() - 5.0 * (1.0 - ln2)).abs() < 1e-14);
    }

    #[test]
    fn potential_star_examples() {
        let p = diag(&[4.0, 1.0]);
        let e = HessianEstimate::from_matrix(p.clone()).unwrap();
        assert!(e.potential_star(&p).unwrap().abs() < 1e-14);
        let e = HessianEstimate::from_matrix(&p * 2.0).unwrap();
        assert!((e.potential_star(&p).unwrap() - 2.0 * (1.0 - std::f64::consts::LN_2)).abs() < 1e-14);
        let e = HessianEstimate::scaled_identity(2, 1.0).unwrap();
        assert!((e.potential_star(&p).unwrap() - (4f64.ln() - 0.75)).abs() < 1e-14);
    }
}
