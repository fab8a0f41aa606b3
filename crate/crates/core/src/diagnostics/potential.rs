use super::{value_slack, CheckContext, CheckId, Verdict, POTENTIAL_SLACK, RATIO_SLACK};
use crate::solver::IterationRecord;

/// Potential recurrence `Ψ(B̂ₖ₊₁) ≤ Ψ(B̂ₖ) + ‖ŷ‖²/(ŝᵀŷ) − 1 + ln(cos²θ̂/m̂)`
/// under `P = L·I`, the smoothness ratio `‖y‖²/(L·yᵀs) ≤ 1`, and, where
/// the gap is known, gradient dominance `q̂ ≥ 2/ϰ`.
///
/// Gradient dominance is checked in the multiplied form
/// `‖g‖²/L ≥ (2/ϰ)·gap` so that roundoff in tiny gaps is absorbed by the
/// function-value slack rather than amplified by a division.
pub fn check_potential_recurrence(records: &[IterationRecord], ctx: &CheckContext) -> Vec<Verdict> {
    let mut out = Vec::new();
    let l = ctx.l;
    for (i, rec) in records.iter().enumerate() {
        if let Some(step) = &rec.step {
            let ratio = step.y_norm_sq_over_ys / l;
            out.push(Verdict::new(CheckId::SmoothnessRatio, rec.k, ratio, 1.0, RATIO_SLACK));
            let next_psi = records.get(i + 1).and_then(|r| r.psi_bar);
            if let (Some(psi), Some(next_psi)) = (rec.psi_bar, next_psi) {
                let cos = step.cos_theta_hat;
                let rhs = psi + ratio - 1.0 + (cos * cos / step.m_hat).ln();
                out.push(Verdict::new(CheckId::PotentialRecurrence, rec.k, next_psi, rhs, POTENTIAL_SLACK));
            }
        }
        if let Some(gap) = rec.gap {
            let bound = 2.0 / ctx.kappa();
            let lhs = (bound - RATIO_SLACK) * gap;
            let rhs = rec.grad_norm * rec.grad_norm / l;
            out.push(Verdict::new(CheckId::GradientDominance, rec.k, lhs, rhs, bound * value_slack(rec.f_value)));
        }
    }
    out
}
