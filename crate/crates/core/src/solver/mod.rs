//! Main quasi-Newton loop for the adaptive, smoothness-aided, and
//! line-search BFGS methods.

mod reference;

pub use reference::{solve_reference, REFERENCE_MAX_ITERS};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::HessianEstimate;
use crate::objective::{weighted_norm, CountingObjective, EvalCounts, Matrix, Objective, Vector};
use crate::stepsize::{
    adaptive_step, armijo_wolfe_search, sa2_step, Branch, LineSearchParams, StepContext, StepDecision,
};

pub const DEFAULT_GRAD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Adaptive step from the self-concordant upper model.
    ABfgs,
    /// Adaptive step sharpened by `L`-smoothness.
    Sa2Bfgs,
    /// Armijo–Wolfe line search.
    LsBfgs,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ABfgs, Method::Sa2Bfgs, Method::LsBfgs];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ABfgs => "abfgs",
            Method::Sa2Bfgs => "sa2bfgs",
            Method::LsBfgs => "lsbfgs",
        }
    }

    pub fn is_adaptive(&self) -> bool {
        !matches!(self, Method::LsBfgs)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "abfgs" => Ok(Method::ABfgs),
            "sa2bfgs" => Ok(Method::Sa2Bfgs),
            "lsbfgs" => Ok(Method::LsBfgs),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialEstimate {
    ScaledIdentity(f64),
    Explicit(Matrix),
}

impl InitialEstimate {
    pub fn build(&self, n: usize) -> Result<HessianEstimate> {
        match self {
            InitialEstimate::ScaledIdentity(c) => HessianEstimate::scaled_identity(n, *c),
            InitialEstimate::Explicit(b) => {
                if b.nrows() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: b.nrows() });
                }
                HessianEstimate::from_matrix(b.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// Self-concordance parameter used by the adaptive rules.
    pub m: f64,
    /// Gradient Lipschitz modulus. Required for `Sa2Bfgs`; elsewhere it only
    /// scales diagnostics and defaults to the objective's constant.
    pub l: Option<f64>,
    pub x0: Vector,
    pub b0: InitialEstimate,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub gap_tol: Option<f64>,
    pub f_star: Option<f64>,
    /// Record `Ψ(B/L)` every iteration (one Cholesky factorization each).
    pub record_potential: bool,
    /// Keep `g`, `s`, `y` per step for post-hoc metrics under `∇²f(x*)`.
    pub record_star_metrics: bool,
    pub line_search: LineSearchParams,
}

impl RunConfig {
    pub fn new(method: Method, x0: Vector, b0: InitialEstimate) -> Self {
        Self {
            method,
            m: 0.0,
            l: None,
            x0,
            b0,
            max_iters: DEFAULT_MAX_ITERS,
            grad_tol: DEFAULT_GRAD_TOL,
            gap_tol: None,
            f_star: None,
            record_potential: true,
            record_star_metrics: false,
            line_search: LineSearchParams::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.x0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.x0.len() });
        }
        if self.max_iters < 1 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Config("grad_tol must be positive".into()));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("M = {} must be finite and nonnegative", self.m)));
        }
        if let Some(l) = self.l {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("L = {l} must be finite and positive")));
            }
        }
        if self.method == Method::Sa2Bfgs && self.l.is_none() {
            return Err(Error::Config("sa2bfgs requires L".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    GradTol,
    GapTol,
    MaxIters,
    CurvatureBreakdown,
    LineSearchFailure,
    InconsistentConstants,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::GradTol => "grad_tol",
            Termination::GapTol => "gap_tol",
            Termination::MaxIters => "max_iters",
            Termination::CurvatureBreakdown => "curvature_breakdown",
            Termination::LineSearchFailure => "line_search_failure",
            Termination::InconsistentConstants => "inconsistent_constants",
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            Termination::CurvatureBreakdown | Termination::LineSearchFailure | Termination::InconsistentConstants
        )
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Termination::GradTol,
            Termination::GapTol,
            Termination::MaxIters,
            Termination::CurvatureBreakdown,
            Termination::LineSearchFailure,
            Termination::InconsistentConstants,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown termination {s:?}")))
    }
}

/// Quantities describing the step taken from iterate `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub branch: Branch,
    pub predicted_decrease: Option<f64>,
    /// `gₖᵀdₖ`.
    pub g_dot_d: f64,
    /// `gₖ₊₁ᵀdₖ`.
    pub g_next_dot_d: f64,
    /// `gₖᵀsₖ`.
    pub g_dot_s: f64,
    pub s_norm: f64,
    /// `−gᵀs/(‖g‖‖s‖)`.
    pub cos_theta_hat: f64,
    /// `yᵀs/(L‖s‖²)`.
    pub m_hat: f64,
    pub y_dot_s: f64,
    /// `‖y‖²/(yᵀs)`, unscaled.
    pub y_norm_sq_over_ys: f64,
    /// `Mη < 1`; adaptive methods only.
    pub in_i_infinity: Option<bool>,
    /// Trial steps evaluated (1 for the adaptive rules).
    pub probes: usize,
}

/// State at iterate `k` and, unless the run stopped there, the step taken.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub f_value: f64,
    pub gap: Option<f64>,
    /// `‖g‖²/(L·gap)`, when the gap is known and positive.
    pub q_hat: Option<f64>,
    pub grad_norm: f64,
    /// `Ψ(B/L)`.
    pub psi_bar: Option<f64>,
    /// Cumulative evaluations needed to reach this iterate.
    pub evals: EvalCounts,
    pub step: Option<StepRecord>,
}

/// Raw vectors of one step, kept for metrics under a non-scalar weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct StepVectors {
    pub g: Vector,
    pub s: Vector,
    pub y: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub method: Method,
    pub m: f64,
    /// `L` used for diagnostics.
    pub l: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    /// Error message for failed runs.
    pub detail: Option<String>,
    pub x_final: Vector,
    pub iterations_used: usize,
    pub evals: EvalCounts,
    pub step_vectors: Option<Vec<StepVectors>>,
}

impl RunResult {
    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("records are never empty")
    }

    /// Fills gaps and `q̂` once the optimal value is known.
    pub fn fill_gaps(&mut self, f_star: f64) {
        for r in &mut self.records {
            let gap = r.f_value - f_star;
            r.gap = Some(gap);
            r.q_hat = (gap > 0.0).then(|| r.grad_norm * r.grad_norm / (self.l * gap));
        }
    }

    /// First iteration whose gap is at most `target`.
    pub fn iterations_to_gap(&self, target: f64) -> Option<usize> {
        self.records.iter().find(|r| r.gap.is_some_and(|g| g <= target)).map(|r| r.k)
    }

    pub fn best_gap(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.gap).reduce(f64::min)
    }

    /// Evaluations the method itself requires. Values computed only for the
    /// trace of the adaptive methods are excluded.
    pub fn algorithmic_evals(&self, counts: &EvalCounts) -> usize {
        if self.method.is_adaptive() {
            counts.gradients + counts.hvps
        } else {
            counts.values + counts.gradients
        }
    }
}

fn termination_for(e: &Error) -> Option<Termination> {
    match e {
        Error::CurvatureBreakdown { .. } | Error::NonPositiveCurvature(_) | Error::NotPositiveDefinite => {
            Some(Termination::CurvatureBreakdown)
        }
        Error::LineSearchFailure { .. } => Some(Termination::LineSearchFailure),
        Error::InconsistentConstants { .. } => Some(Termination::InconsistentConstants),
        _ => None,
    }
}

/// Runs one solver configuration to termination.
///
/// Configuration and evaluation errors are returned as `Err`. Numerical
/// failures of the method (curvature breakdown, line-search failure,
/// inconsistent constants) end the run with the partial trace kept.
pub fn run(obj: &dyn Objective, cfg: &RunConfig) -> Result<RunResult> {
    let n = obj.dim();
    cfg.validate(n)?;
    let counted = CountingObjective::new(obj);
    let l_diag = cfg.l.unwrap_or(obj.constants().l);
    let mut est = cfg.b0.build(n)?;
    let mut x = cfg.x0.clone();
    let (mut f, mut g) = counted.value_and_gradient(&x)?;
    let mut records = Vec::new();
    let mut vectors = cfg.record_star_metrics.then(Vec::new);
    let mut termination = None;
    let mut detail = None;

    for k in 0.. {
        let grad_norm = g.norm();
        let gap = cfg.f_star.map(|fs| f - fs);
        let psi_bar = if cfg.record_potential { est.potential(l_diag).ok() } else { None };
        let mut rec = IterationRecord {
            k,
            f_value: f,
            gap,
            q_hat: None,
            grad_norm,
            psi_bar,
            evals: counted.counts(),
            step: None,
        };
        let stop = if grad_norm <= cfg.grad_tol {
            Some(Termination::GradTol)
        } else if matches!((gap, cfg.gap_tol), (Some(gap), Some(tol)) if gap <= tol) {
            Some(Termination::GapTol)
        } else if k >= cfg.max_iters {
            Some(Termination::MaxIters)
        } else {
            None
        };
        if let Some(t) = stop {
            records.push(rec);
            termination = Some(t);
            break;
        }

        match take_step(&counted, cfg, &est, &x, f, &g) {
            Ok(taken) => {
                let Taken { decision, probes, d, f_next, g_next } = taken;
                let s = &d * decision.t;
                let y = &g_next - &g;
                let g_dot_d = g.dot(&d);
                let g_dot_s = g.dot(&s);
                let s_norm = s.norm();
                let y_dot_s = y.dot(&s);
                rec.step = Some(StepRecord {
                    t: decision.t,
                    eta: decision.eta,
                    alpha: decision.alpha,
                    branch: decision.branch,
                    predicted_decrease: decision.predicted_decrease,
                    g_dot_d,
                    g_next_dot_d: g_next.dot(&d),
                    g_dot_s,
                    s_norm,
                    cos_theta_hat: -g_dot_s / (grad_norm * s_norm),
                    m_hat: y_dot_s / (l_diag * s_norm * s_norm),
                    y_dot_s,
                    y_norm_sq_over_ys: y.norm_squared() / y_dot_s,
                    in_i_infinity: if cfg.method.is_adaptive() { decision.eta.map(|e| cfg.m * e < 1.0) } else { None },
                    probes,
                });
                records.push(rec);
                let update = est.update(&s, &y);
                if let Some(v) = vectors.as_mut() {
                    v.push(StepVectors { g: g.clone(), s: s.clone(), y: y.clone() });
                }
                x += &s;
                f = f_next;
                g = g_next;
                if let Err(e) = update {
                    // A refused update at an already-converged point is not a failure.
                    termination = Some(if g.norm() <= cfg.grad_tol {
                        Termination::GradTol
                    } else {
                        detail = Some(e.to_string());
                        Termination::CurvatureBreakdown
                    });
                    // Record the state reached by the last step.
                    records.push(IterationRecord {
                        k: k + 1,
                        f_value: f,
                        gap: cfg.f_star.map(|fs| f - fs),
                        q_hat: None,
                        grad_norm: g.norm(),
                        psi_bar: None,
                        evals: counted.counts(),
                        step: None,
                    });
                    break;
                }
            }
            Err(e) => match termination_for(&e) {
                Some(t) => {
                    records.push(rec);
                    termination = Some(t);
                    detail = Some(e.to_string());
                    break;
                }
                None => return Err(e),
            },
        }
    }

    let iterations_used = records.iter().filter(|r| r.step.is_some()).count();
    let mut result = RunResult {
        method: cfg.method,
        m: cfg.m,
        l: l_diag,
        records,
        termination: termination.expect("loop exits with a termination"),
        detail,
        x_final: x,
        iterations_used,
        evals: counted.counts(),
        step_vectors: vectors,
    };
    if let Some(fs) = cfg.f_star {
        result.fill_gaps(fs);
    }
    Ok(result)
}

struct Taken {
    decision: StepDecision,
    probes: usize,
    d: Vector,
    f_next: f64,
    g_next: Vector,
}

fn take_step(
    obj: &CountingObjective<'_>,
    cfg: &RunConfig,
    est: &HessianEstimate,
    x: &Vector,
    f: f64,
    g: &Vector,
) -> Result<Taken> {
    let d = est.direction(g)?;
    let g_dot_d = g.dot(&d);
    if !(g_dot_d < 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    match cfg.method {
        Method::ABfgs | Method::Sa2Bfgs => {
            let ctx = StepContext {
                g_dot_d,
                d_norm: d.norm(),
                d_weighted_norm: weighted_norm(obj, x, &d)?,
                m: cfg.m,
                l: cfg.l,
            };
            let decision = if cfg.method == Method::ABfgs { adaptive_step(&ctx)? } else { sa2_step(&ctx)? };
            let (f_next, g_next) = obj.value_and_gradient(&(x + &d * decision.t))?;
            Ok(Taken { decision, probes: 1, d, f_next, g_next })
        }
        Method::LsBfgs => {
            let mut last: Option<(f64, Vector)> = None;
            let out = armijo_wolfe_search(f, g_dot_d, &cfg.line_search, |t| {
                let (fv, gv) = obj.value_and_gradient(&(x + &d * t))?;
                let slope = gv.dot(&d);
                last = Some((fv, gv));
                Ok((fv, slope))
            })?;
            let (f_next, g_next) = last.expect("search evaluates at least once");
            Ok(Taken { decision: out.decision, probes: out.probes, d, f_next, g_next })
        }
    }
}
