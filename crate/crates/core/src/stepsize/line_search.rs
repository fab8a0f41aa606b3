use super::{Branch, StepDecision};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    /// Sufficient-decrease constant.
    pub armijo: f64,
    /// Curvature constant.
    pub wolfe: f64,
    /// Probes allowed after the initial trial step.
    pub max_refinements: usize,
    pub max_step: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self { armijo: 0.1, wolfe: 0.9, max_refinements: 50, max_step: 2f64.powi(50) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome {
    pub decision: StepDecision,
    /// Number of trial steps evaluated, including the accepted one.
    pub probes: usize,
    /// `f(x + td)` at the accepted step.
    pub value: f64,
    /// `∇f(x + td)ᵀd` at the accepted step.
    pub slope: f64,
}

/// Armijo–Wolfe search on `φ(t) = f(x + td)`.
///
/// Starts at `t = 1`, doubles while Armijo holds but the curvature condition
/// fails, halves while no acceptable lower end is known, and otherwise
/// bisects the bracket geometrically. `probe(t)` returns `(φ(t), φ'(t))`;
/// the last probe is always the accepted step.
pub fn armijo_wolfe_search<F>(f0: f64, g_dot_d: f64, params: &LineSearchParams, mut probe: F) -> Result<LineSearchOutcome>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if !(g_dot_d < 0.0) {
        return Err(Error::Domain { name: "g_dot_d", value: g_dot_d, domain: "(-∞, 0)" });
    }
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut t = 1.0;
    for probes in 1..=params.max_refinements + 1 {
        let (phi, slope) = probe(t)?;
        let armijo = phi.is_finite() && phi <= f0 + params.armijo * t * g_dot_d;
        if !armijo {
            hi = t;
        } else if slope < params.wolfe * g_dot_d {
            lo = t;
        } else {
            let decision = StepDecision { t, eta: None, alpha: None, branch: Branch::LineSearch, predicted_decrease: None };
            return Ok(LineSearchOutcome { decision, probes, value: phi, slope });
        }
        t = if hi.is_infinite() {
            2.0 * t
        } else if lo == 0.0 {
            0.5 * t
        } else {
            (lo * hi).sqrt()
        };
        if t > params.max_step {
            return Err(Error::LineSearchFailure { probes, t });
        }
    }
    Err(Error::LineSearchFailure { probes: params.max_refinements + 1, t })
}

#[cfg(test)]
mod tests {
    use super::*;

    // f = ½x² from x with direction d.
    fn quad(x: f64, d: f64) -> impl FnMut(f64) -> Result<(f64, f64)> {
        move |t| {
            let z = x + t * d;
            Ok((0.5 * z * z, z * d))
        }
    }

    #[test]
    fn unit_step_accepted() {
        let out = armijo_wolfe_search(0.5, -1.0, &LineSearchParams::default(), quad(1.0, -1.0)).unwrap();
        assert_eq!((out.decision.t, out.probes), (1.0, 1));
    }

    #[test]
    fn boundary_wolfe_accepts_unit_step() {
        // φ'(1) = β·φ'(0) exactly: the curvature condition holds with equality.
        let out = armijo_wolfe_search(0.5, -0.1, &LineSearchParams::default(), quad(1.0, -0.1)).unwrap();
        assert_eq!(out.decision.t, 1.0);
    }

    #[test]
    fn short_direction_expands() {
        let out = armijo_wolfe_search(0.5, -0.05, &LineSearchParams::default(), quad(1.0, -0.05)).unwrap();
        assert!(out.decision.t > 1.0);
        assert!(out.probes > 1);
        let (t, z) = (out.decision.t, 1.0 - 0.05 * out.decision.t);
        assert!(0.5 * z * z <= 0.5 + 0.1 * t * -0.05);
        assert!(z * -0.05 >= 0.9 * -0.05);
    }

    #[test]
    fn long_direction_shrinks() {
        let out = armijo_wolfe_search(0.5, -100.0, &LineSearchParams::default(), quad(1.0, -100.0)).unwrap();
        assert!(out.decision.t < 1.0);
        let t = out.decision.t;
        let z = 1.0 - 100.0 * t;
        assert!(0.5 * z * z <= 0.5 - 10.0 * t);
        assert!(-100.0 * z >= -90.0);
    }

    #[test]
    fn unbounded_fails() {
        let err = armijo_wolfe_search(0.0, -1.0, &LineSearchParams::default(), |t| Ok((-t, -1.0))).unwrap_err();
        assert!(matches!(err, Error::LineSearchFailure { .. }));
    }
}
