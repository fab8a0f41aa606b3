use nalgebra::Cholesky;

use super::{value_slack, CheckId, Verdict, RATIO_SLACK};
use crate::error::{Error, Result};
use crate::objective::{Matrix, SmoothnessConstants};
use crate::solver::{IterationRecord, RunResult};

/// Largest dimension for which the dense factorization is attempted.
pub const STAR_MAX_DIM: usize = 2000;

/// Step metrics under the weighting `P = ∇²f(x*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarMetrics {
    pub k: usize,
    pub cos_theta: f64,
    pub m_hat: f64,
    /// `gᵀP⁻¹g`.
    pub g_pinv_g: f64,
    /// `gᵀP⁻¹g / gap`.
    pub q_hat: Option<f64>,
    /// `yᵀP⁻¹y / yᵀs`.
    pub ratio: f64,
    /// `2√2·M̃·√gap`.
    pub c_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarReport {
    pub metrics: Vec<StarMetrics>,
    pub verdicts: Vec<Verdict>,
}

/// Recomputes the step metrics of a run under `P = hess_star` and checks
/// `q̂ₖ ≥ 2/(1+Cₖ)²` and `‖ŷₖ‖²/(ŝₖᵀŷₖ) ≤ 1 + Cₖ`.
///
/// The run must have been recorded with step vectors and have its gaps filled.
pub fn star_metrics(run: &RunResult, hess_star: &Matrix, constants: &SmoothnessConstants) -> Result<StarReport> {
    let n = hess_star.nrows();
    if n > STAR_MAX_DIM {
        return Err(Error::Config(format!("dimension {n} exceeds the dense limit {STAR_MAX_DIM}")));
    }
    let vectors = run
        .step_vectors
        .as_ref()
        .ok_or_else(|| Error::Config("run was recorded without step vectors".into()))?;
    let chol = Cholesky::new(hess_star.clone()).ok_or(Error::NotPositiveDefinite)?;
    let m_tilde = constants.m_tilde();
    let mut metrics = Vec::with_capacity(vectors.len());
    for (rec, v) in run.records.iter().zip(vectors) {
        let g_pinv_g = v.g.dot(&chol.solve(&v.g));
        let y_pinv_y = v.y.dot(&chol.solve(&v.y));
        let s_p_s = v.s.dot(&(hess_star * &v.s));
        let g_dot_s = v.g.dot(&v.s);
        let y_dot_s = v.y.dot(&v.s);
        let c_k = rec.gap.map(|gap| 2.0 * 2f64.sqrt() * m_tilde * gap.max(0.0).sqrt());
        let ratio = y_pinv_y / y_dot_s;
        metrics.push(StarMetrics {
            k: rec.k,
            cos_theta: -g_dot_s / (g_pinv_g.sqrt() * s_p_s.sqrt()),
            m_hat: y_dot_s / s_p_s,
            g_pinv_g,
            q_hat: rec.gap.filter(|g| *g > 0.0).map(|gap| g_pinv_g / gap),
            ratio,
            c_k,
        });
    }
    let verdicts = star_verdicts(&run.records, &metrics);
    Ok(StarReport { metrics, verdicts })
}

const Y_ROUNDING_FACTOR: f64 = 16.0;

/// Relative rounding error of `y = g⁺ − g`, taking `‖g₀‖` as the scale of
/// the gradient evaluation.
fn y_rounding(g0_norm: f64, rec: &IterationRecord) -> f64 {
    let Some(step) = &rec.step else { return 0.0 };
    let y_norm = (step.y_norm_sq_over_ys * step.y_dot_s).sqrt();
    if y_norm > 0.0 {
        Y_ROUNDING_FACTOR * f64::EPSILON * g0_norm / y_norm
    } else {
        0.0
    }
}

/// Checks `q̂ₖ ≥ 2/(1+Cₖ)²` (multiplied by the gap) and
/// `‖ŷₖ‖²/(ŝₖᵀŷₖ) ≤ 1 + Cₖ` for metrics computed earlier.
///
/// The ratio bound is tight on quadratics, so its slack includes the
/// rounding of `y` near the gradient noise floor.
pub fn star_verdicts(records: &[IterationRecord], metrics: &[StarMetrics]) -> Vec<Verdict> {
    let mut verdicts = Vec::new();
    let g0_norm = records.first().map_or(0.0, |r| r.grad_norm);
    for m in metrics {
        let Some(rec) = records.get(m.k).filter(|r| r.k == m.k) else { continue };
        if let (Some(gap), Some(c)) = (rec.gap, m.c_k) {
            let bound = 2.0 / (1.0 + c).powi(2);
            let tol = bound * value_slack(rec.f_value);
            verdicts.push(Verdict::new(CheckId::StarGradientDominance, m.k, (bound - RATIO_SLACK) * gap, m.g_pinv_g, tol));
            let tol = RATIO_SLACK + (1.0 + c) * y_rounding(g0_norm, rec);
            verdicts.push(Verdict::new(CheckId::StarSmoothnessRatio, m.k, m.ratio, 1.0 + c, tol));
        }
    }
    verdicts
}
