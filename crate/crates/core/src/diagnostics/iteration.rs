use super::{value_slack, CheckContext, CheckId, Verdict};
use crate::error::{Error, Result};
use crate::solver::{IterationRecord, Method};

/// Step inequalities between iterate `k` and `k+1`.
///
/// Adaptive methods: predicted decrease `f⁺ ≤ f − ω(Mη)/M²`, the Armijo
/// condition with constant ½, and the two-sided curvature condition on
/// `g⁺ᵀd`. The line-search method is checked against its own Armijo and
/// Wolfe constants. Every method is checked for monotone decrease of `f`
/// and, when known, of the gap; those verdicts carry the index `k+1`.
pub fn check_iteration(cur: &IterationRecord, next: &IterationRecord, ctx: &CheckContext) -> Result<Vec<Verdict>> {
    if next.k != cur.k + 1 {
        return Err(Error::Config(format!("records {} and {} are not consecutive", cur.k, next.k)));
    }
    let step = cur.step.as_ref().ok_or_else(|| Error::Config(format!("record {} has no step", cur.k)))?;
    let k = cur.k;
    let (f0, f1) = (cur.f_value, next.f_value);
    let tol = value_slack(f0);
    let mut out = vec![Verdict::new(CheckId::Monotone, next.k, f1 - f0, 0.0, tol)];
    if let (Some(g0), Some(g1)) = (cur.gap, next.gap) {
        out.push(Verdict::new(CheckId::Monotone, next.k, g1 - g0, 0.0, tol));
    }

    match ctx.method {
        Method::ABfgs | Method::Sa2Bfgs => {
            let eta = step.eta.ok_or_else(|| Error::Config(format!("record {k} lacks eta")))?;
            let decrease = step.predicted_decrease.unwrap_or_else(|| crate::stepsize::scaled_omega(ctx.m, eta));
            out.push(Verdict::new(CheckId::Decrease, k, f1, f0 - decrease, tol));
            out.push(Verdict::new(CheckId::ArmijoHalf, k, f1 - f0, 0.5 * step.g_dot_s, tol));
            let me2 = 2.0 * ctx.m * eta;
            let mut factor = me2 / (1.0 + me2);
            if ctx.method == Method::Sa2Bfgs {
                factor = factor.min(1.0 - 1.0 / ctx.kappa());
            }
            out.push(Verdict::new(CheckId::CurvatureLower, k, factor * step.g_dot_d, step.g_next_dot_d, tol));
            out.push(Verdict::new(CheckId::CurvatureUpper, k, step.g_next_dot_d, 0.0, tol));
        }
        Method::LsBfgs => {
            let ls = &ctx.line_search;
            out.push(Verdict::new(CheckId::LineSearchArmijo, k, f1 - f0, ls.armijo * step.g_dot_s, tol));
            out.push(Verdict::new(CheckId::LineSearchWolfe, k, ls.wolfe * step.g_dot_d, step.g_next_dot_d, tol));
        }
    }
    Ok(out)
}
