//! Numerical oracles for the adabfgs test suites.
//!
//! Each oracle computes its quantity by a route unrelated to the code it
//! checks: finite differences instead of analytic derivatives, grid search
//! instead of closed-form step rules, LU inversion instead of rank-2
//! updates, eigenvalues instead of Cholesky log-determinants.

use adabfgs_core::objective::{Matrix, Objective, QuadraticObjective, Vector};
use adabfgs_core::stepsize::StepContext;
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Points in the coarse grid scan.
    pub grid_points: usize,
    /// Golden-section iterations after the scan.
    pub golden_steps: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { fd_step: 1e-6, grid_points: 4096, golden_steps: 60, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    NotUnimodal { upper: f64 },
    NotPositiveDefinite,
    BadConfig(&'static str),
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::error::Error for OracleError {}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central-difference gradient with per-coordinate step `h·max(1, |xᵢ|)`.
pub fn fd_gradient(obj: &dyn Objective, x: &Vector, h: f64) -> Vector {
    let mut out = Vector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let step = h * x[i].abs().max(1.0);
        xp[i] = x[i] + step;
        let fp = obj.value(&xp).expect("oracle evaluation");
        xp[i] = x[i] - step;
        let fm = obj.value(&xp).expect("oracle evaluation");
        xp[i] = x[i];
        out[i] = (fp - fm) / (2.0 * step);
    }
    out
}

/// Central difference of gradients along `v`.
pub fn fd_hvp(obj: &dyn Objective, x: &Vector, v: &Vector, h: f64) -> Vector {
    let vn = v.norm();
    if vn == 0.0 {
        return Vector::zeros(x.len());
    }
    let eps = h * x.norm().max(1.0) / vn;
    let gp = obj.gradient(&(x + v * eps)).expect("oracle evaluation");
    let gm = obj.gradient(&(x - v * eps)).expect("oracle evaluation");
    (gp - gm) / (2.0 * eps)
}

/// Which local upper model to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperModel {
    /// `t·gᵀd + (−z − ln(1 − z))/M²` with `z = Mt‖d‖ₓ`.
    SelfConcordant,
    /// Self-concordant up to `tᵘ = (1−α)/(M‖d‖ₓ)`, quadratic extension beyond.
    SmoothnessAided,
}

/// Evaluates an upper model directly from its definition.
pub fn eval_model(ctx: &StepContext, model: UpperModel, t: f64) -> f64 {
    let (gd, dx, m) = (ctx.g_dot_d, ctx.d_weighted_norm, ctx.m);
    let sc = |t: f64| {
        if m == 0.0 {
            t * gd + 0.5 * t * t * dx * dx
        } else {
            let z = m * t * dx;
            t * gd + (-z - (-z).ln_1p()) / (m * m)
        }
    };
    match model {
        UpperModel::SelfConcordant => sc(t),
        UpperModel::SmoothnessAided => {
            let l = ctx.l.expect("smoothness-aided model needs L");
            let alpha = (dx / (l.sqrt() * ctx.d_norm)).min(1.0);
            if m == 0.0 {
                return sc(t);
            }
            let tu = (1.0 - alpha) / (m * dx);
            if t <= tu {
                return sc(t);
            }
            let base = sc(tu) - tu * gd;
            let dt = t - tu;
            t * gd + base + tu * dt * dx * dx / (1.0 - m * tu * dx) + 0.5 * l * dt * dt * ctx.d_norm * ctx.d_norm
        }
    }
}

/// Minimizes a model on `[0, upper]` by a grid scan followed by golden-section
/// refinement around the best grid point.
pub fn grid_argmin_step(ctx: &StepContext, model: UpperModel, upper: f64, cfg: &OracleConfig) -> Result<f64, OracleError> {
    if !(upper > 0.0) || cfg.grid_points < 16 {
        return Err(OracleError::BadConfig("upper must be positive and the grid at least 16 points"));
    }
    let f = |t: f64| eval_model(ctx, model, t);
    let mut hi = upper;
    for attempt in 0..2 {
        let n = cfg.grid_points;
        let ts: Vec<f64> = (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
        let best = (0..n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let not_unimodal = vals.windows(2).skip(best).any(|w| w[1] < w[0] - 1e-12 * scale)
            || vals[..=best].windows(2).any(|w| w[1] > w[0] + 1e-12 * scale);
        if not_unimodal || best == n - 1 {
            if attempt == 0 {
                hi *= 2.0;
                continue;
            }
            return Err(OracleError::NotUnimodal { upper: hi });
        }
        let (mut a, mut b) = (ts[best.saturating_sub(1)], ts[(best + 1).min(n - 1)]);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..cfg.golden_steps {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        return Ok(0.5 * (a + b));
    }
    Err(OracleError::NotUnimodal { upper: hi })
}

/// Central finite difference of a scalar function.
pub fn fd_derivative(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t + h) - f(t - h)) / (2.0 * h)
}

/// Explicit inverse by LU factorization.
pub fn dense_inverse(b: &Matrix) -> Result<Matrix, OracleError> {
    b.clone().lu().try_inverse().ok_or(OracleError::NotPositiveDefinite)
}

/// `Σ(λᵢ/c − ln(λᵢ/c) − 1)` over the eigenvalues of `B`.
pub fn eigen_potential(b: &Matrix, c: f64) -> Result<f64, OracleError> {
    let eig = SymmetricEigen::new(b.clone()).eigenvalues;
    if eig.iter().any(|&l| !(l > 0.0)) {
        return Err(OracleError::NotPositiveDefinite);
    }
    Ok(eig.iter().map(|&l| l / c - (l / c).ln() - 1.0).sum())
}

/// Random orthogonal matrix from the QR factorization of a uniform matrix.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix {
    let a = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    a.qr().q()
}

/// Random SPD matrix with eigenvalues log-uniform in `[1, cond]`.
pub fn random_spd(n: usize, cond: f64, rng: &mut impl Rng) -> Matrix {
    let q = random_orthogonal(n, rng);
    let d = Vector::from_fn(n, |_, _| cond.powf(rng.gen_range(0.0..1.0)));
    let m = &q * Matrix::from_diagonal(&d) * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn random_vector(n: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_quadratic(n: usize, cond: f64, rng: &mut impl Rng) -> QuadraticObjective {
    let a = random_spd(n, cond, rng);
    let b = random_vector(n, rng);
    QuadraticObjective::new(a, b).expect("random SPD matrix")
}

/// Relative error `‖a − b‖/max(‖b‖, floor)`.
pub fn rel_err(a: &Vector, b: &Vector, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

/// Random step context with `M ∈ [0, 2]` (exactly 0 one time in ten),
/// `η ∈ [0.01, 5]`, `α ∈ (0, 1]`, `‖d‖ₓ ∈ [0.5, 2]`, and `‖d‖ = 1`.
pub fn random_step_context(rng: &mut impl Rng) -> StepContext {
    let m = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..=2.0) };
    let eta = rng.gen_range(0.01..=5.0);
    let alpha: f64 = if rng.gen_bool(0.05) { 1.0 } else { 1.0 - rng.gen_range(0.0..1.0) };
    let dx = rng.gen_range(0.5..=2.0);
    StepContext { g_dot_d: -eta * dx, d_norm: 1.0, d_weighted_norm: dx, m, l: Some((dx / alpha).powi(2)) }
}

/// Fourth-order central difference of a model's slope at `t`, with the
/// stencil kept on one side of the smoothness-aided breakpoint.
pub fn model_slope(ctx: &StepContext, model: UpperModel, t: f64) -> f64 {
    let mut h = 1e-4 * t;
    if ctx.m > 0.0 {
        // The self-concordant model has a pole at Mt‖d‖ₓ = 1.
        let far = 1.0 / (ctx.m * ctx.d_weighted_norm) - t;
        if model == UpperModel::SelfConcordant || far > 0.0 {
            h = h.min(far / 100.0);
        }
        if model == UpperModel::SmoothnessAided {
            let l = ctx.l.expect("L");
            let alpha = (ctx.d_weighted_norm / (l.sqrt() * ctx.d_norm)).min(1.0);
            let tu = (1.0 - alpha) / (ctx.m * ctx.d_weighted_norm);
            let gap = (t - tu).abs();
            if gap > 0.0 {
                h = h.min(gap / 3.0).max(1e-7 * t);
            }
        }
    }
    let f = |s: f64| eval_model(ctx, model, s);
    (8.0 * (f(t + h) - f(t - h)) - (f(t + 2.0 * h) - f(t - 2.0 * h))) / (12.0 * h)
}
