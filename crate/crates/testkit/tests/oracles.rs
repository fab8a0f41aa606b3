use adabfgs_core::data::SparseDataset;
use adabfgs_core::estimator::HessianEstimate;
use adabfgs_core::objective::{LogisticObjective, Matrix, QuadraticObjective, Vector};
use adabfgs_core::stepsize::StepContext;
use adabfgs_testkit::*;

fn diag(v: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_row_slice(v))
}

#[test]
fn fd_gradient_on_quadratic() {
    let mut r = rng(1);
    let q = random_quadratic(6, 10.0, &mut r);
    let x = random_vector(6, &mut r);
    let exact = q.matrix() * &x - q.linear_term();
    assert!(rel_err(&fd_gradient(&q, &x, 1e-6), &exact, 1e-12) < 1e-8);
}

#[test]
fn fd_gradient_logistic_single_sample() {
    let ds = SparseDataset::from_rows(2, vec![vec![(0, 1.0)]], vec![1.0]).unwrap();
    let f = LogisticObjective::new(ds).unwrap();
    let g = fd_gradient(&f, &Vector::zeros(2), 1e-6);
    assert!((g[0] + 0.5).abs() < 1e-9 && g[1].abs() < 1e-9);
}

#[test]
fn fd_hvp_on_quadratic() {
    let q = QuadraticObjective::new(diag(&[4.0, 1.0]), Vector::zeros(2)).unwrap();
    let hv = fd_hvp(&q, &Vector::from_vec(vec![0.3, 2.0]), &Vector::from_vec(vec![1.0, 1.0]), 1e-6);
    assert!((hv - Vector::from_vec(vec![4.0, 1.0])).norm() < 1e-8);
}

#[test]
fn dense_inverse_and_eigen_potential_examples() {
    assert_eq!(dense_inverse(&Matrix::identity(3, 3)).unwrap(), Matrix::identity(3, 3));
    assert!(eigen_potential(&Matrix::identity(3, 3), 1.0).unwrap().abs() < 1e-15);
    let psi = eigen_potential(&diag(&[2.0, 1.0]), 1.0).unwrap();
    assert!((psi - (1.0 - std::f64::consts::LN_2)).abs() < 1e-15);
    assert!(eigen_potential(&diag(&[1.0, -1.0]), 1.0).is_err());
}

#[test]
fn eigen_potential_matches_cholesky_path() {
    let mut r = rng(7);
    for _ in 0..5 {
        let b = random_spd(20, 1e3, &mut r);
        let c = r.gen_range_f64(0.5, 5.0);
        let est = HessianEstimate::from_matrix(b.clone()).unwrap();
        let a = eigen_potential(&b, c).unwrap();
        let p = est.potential(c).unwrap();
        assert!((a - p).abs() <= 1e-9 * a.abs(), "{a} vs {p}");
    }
}

trait RangeExt {
    fn gen_range_f64(&mut self, lo: f64, hi: f64) -> f64;
}

impl<R: rand::Rng> RangeExt for R {
    fn gen_range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        self.gen_range(lo..hi)
    }
}

fn ctx(g_dot_d: f64, dx: f64, m: f64, l: Option<f64>, d_norm: f64) -> StepContext {
    StepContext { g_dot_d, d_norm, d_weighted_norm: dx, m, l }
}

#[test]
fn grid_argmin_examples() {
    let cfg = OracleConfig::default();
    let c = ctx(-1.0, 1.0, 1.0, None, 1.0);
    let t = grid_argmin_step(&c, UpperModel::SelfConcordant, 1.0 - 1e-9, &cfg).unwrap();
    assert!((t - 0.5).abs() < 1e-6, "{t}");

    let c = ctx(-1.0, 1.0, 1.0, Some(1.5625), 1.0);
    let t = grid_argmin_step(&c, UpperModel::SmoothnessAided, 6.8, &cfg).unwrap();
    assert!((t - 0.68).abs() < 1e-6, "{t}");

    let c = ctx(-3.0, 2.0, 0.0, None, 1.0);
    let t = grid_argmin_step(&c, UpperModel::SelfConcordant, 7.5, &cfg).unwrap();
    assert!((t - 0.75).abs() < 1e-6, "{t}");
}

#[test]
fn grid_argmin_widens_once() {
    let cfg = OracleConfig::default();
    // Minimizer at 1: outside [0, 0.8] but inside the widened [0, 1.6].
    let c = ctx(-1.0, 1.0, 0.0, Some(1.0), 1.0);
    let t = grid_argmin_step(&c, UpperModel::SmoothnessAided, 0.8, &cfg).unwrap();
    assert!((t - 1.0).abs() < 1e-6);
    // Outside even the widened interval.
    assert!(grid_argmin_step(&c, UpperModel::SmoothnessAided, 0.4, &cfg).is_err());
}
