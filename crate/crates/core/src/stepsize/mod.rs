//! Step-size rules: the self-concordant adaptive step, the smoothness-aided
//! step, their local upper models, and an Armijo–Wolfe search for the
//! baseline method.

mod line_search;

pub use line_search::{armijo_wolfe_search, LineSearchOutcome, LineSearchParams};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance above 1 within which `α` is treated as roundoff and clamped.
pub const ALPHA_CLAMP: f64 = 1e-10;

/// Below this argument the ω functions switch to their Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;

/// `ω(z) = z − ln(1 + z)` for `z ≥ 0`.
pub fn omega(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain { name: "z", value: z, domain: "[0, ∞)" });
    }
    Ok(omega_unchecked(z))
}

/// `ω*(z) = −z − ln(1 − z)` for `z ∈ [0, 1)`.
pub fn omega_star(z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain { name: "z", value: z, domain: "[0, 1)" });
    }
    Ok(omega_star_unchecked(z))
}

/// `y + √(2y)`, an upper bound on `ω⁻¹(y)`.
pub fn omega_inv_upper(y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::Domain { name: "y", value: y, domain: "[0, ∞)" });
    }
    Ok(y + (2.0 * y).sqrt())
}

fn omega_unchecked(z: f64) -> f64 {
    if z < SERIES_CUTOFF {
        z * z * (0.5 - z * (1.0 / 3.0 - z * (0.25 - z * (0.2 - z / 6.0))))
    } else {
        z - z.ln_1p()
    }
}

fn omega_star_unchecked(z: f64) -> f64 {
    if z < SERIES_CUTOFF {
        z * z * (0.5 + z * (1.0 / 3.0 + z * (0.25 + z * (0.2 + z / 6.0))))
    } else {
        -z - (-z).ln_1p()
    }
}

/// `ω(Mη)/M²`, continuous at `M = 0` where it equals `η²/2`.
pub fn scaled_omega(m: f64, eta: f64) -> f64 {
    let z = m * eta;
    if z < SERIES_CUTOFF {
        eta * eta * (0.5 - z * (1.0 / 3.0 - z * (0.25 - z * (0.2 - z / 6.0))))
    } else {
        omega_unchecked(z) / (m * m)
    }
}

/// `ω*(Mu)/M²`, continuous at `M = 0` where it equals `u²/2`.
fn scaled_omega_star(m: f64, u: f64) -> f64 {
    let z = m * u;
    if z < SERIES_CUTOFF {
        u * u * (0.5 + z * (1.0 / 3.0 + z * (0.25 + z * (0.2 + z / 6.0))))
    } else {
        omega_star_unchecked(z) / (m * m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    SelfConcordant,
    SmoothnessAided,
    LineSearch,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::SelfConcordant => "self_concordant",
            Branch::SmoothnessAided => "smoothness_aided",
            Branch::LineSearch => "line_search",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self_concordant" => Ok(Branch::SelfConcordant),
            "smoothness_aided" => Ok(Branch::SmoothnessAided),
            "line_search" => Ok(Branch::LineSearch),
            other => Err(Error::Config(format!("unknown branch {other:?}"))),
        }
    }
}

/// Directional quantities at the current iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepContext {
    /// `gᵀd`, negative for a descent direction.
    pub g_dot_d: f64,
    /// `‖d‖`.
    pub d_norm: f64,
    /// `‖d‖ₓ`.
    pub d_weighted_norm: f64,
    /// Self-concordance parameter.
    pub m: f64,
    /// Gradient Lipschitz modulus, required by the smoothness-aided rule.
    pub l: Option<f64>,
}

impl StepContext {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_dot_d < 0.0) || !self.g_dot_d.is_finite() {
            return Err(Error::Domain { name: "g_dot_d", value: self.g_dot_d, domain: "(-∞, 0)" });
        }
        if !(self.d_norm > 0.0 && self.d_norm.is_finite()) {
            return Err(Error::Domain { name: "d_norm", value: self.d_norm, domain: "(0, ∞)" });
        }
        if !(self.d_weighted_norm > 0.0 && self.d_weighted_norm.is_finite()) {
            return Err(Error::Domain { name: "d_weighted_norm", value: self.d_weighted_norm, domain: "(0, ∞)" });
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::Domain { name: "M", value: self.m, domain: "[0, ∞)" });
        }
        if let Some(l) = self.l {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Domain { name: "L", value: l, domain: "(0, ∞)" });
            }
        }
        Ok(())
    }

    /// `η = −gᵀd / ‖d‖ₓ`.
    pub fn eta(&self) -> f64 {
        -self.g_dot_d / self.d_weighted_norm
    }

    /// `α = ‖d‖ₓ / (√L‖d‖)`, clamped to 1 within roundoff.
    pub fn alpha(&self) -> Result<f64> {
        let l = self.l.ok_or_else(|| Error::Config("smoothness-aided step requires L".into()))?;
        let alpha = self.d_weighted_norm / (l.sqrt() * self.d_norm);
        if alpha > 1.0 + ALPHA_CLAMP {
            return Err(Error::InconsistentConstants { alpha });
        }
        Ok(alpha.min(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    pub t: f64,
    /// `η`; absent for line-search steps.
    pub eta: Option<f64>,
    /// `α`; present only for smoothness-aided steps.
    pub alpha: Option<f64>,
    pub branch: Branch,
    /// `ω(Mη)/M²`; absent for line-search steps.
    pub predicted_decrease: Option<f64>,
}

/// `t = η / ((1 + Mη)‖d‖ₓ)`.
pub fn adaptive_step(ctx: &StepContext) -> Result<StepDecision> {
    ctx.validate()?;
    let eta = ctx.eta();
    Ok(StepDecision {
        t: eta / ((1.0 + ctx.m * eta) * ctx.d_weighted_norm),
        eta: Some(eta),
        alpha: None,
        branch: Branch::SelfConcordant,
        predicted_decrease: Some(scaled_omega(ctx.m, eta)),
    })
}

/// Smoothness-aided step: the adaptive step while `(1 + Mη)α ≤ 1`, otherwise
/// `t = (Mηα² + (1 − α)²) / (M‖d‖ₓ)`.
pub fn sa2_step(ctx: &StepContext) -> Result<StepDecision> {
    ctx.validate()?;
    let eta = ctx.eta();
    let alpha = ctx.alpha()?;
    let me = ctx.m * eta;
    let (t, branch) = if (1.0 + me) * alpha <= 1.0 {
        (eta / ((1.0 + me) * ctx.d_weighted_norm), Branch::SelfConcordant)
    } else {
        ((me * alpha * alpha + (1.0 - alpha).powi(2)) / (ctx.m * ctx.d_weighted_norm), Branch::SmoothnessAided)
    };
    Ok(StepDecision {
        t,
        eta: Some(eta),
        alpha: Some(alpha),
        branch,
        predicted_decrease: Some(scaled_omega(ctx.m, eta)),
    })
}

/// Self-concordant upper model of `f(x + td) − f(x)`:
/// `t·gᵀd + ω*(Mt‖d‖ₓ)/M²`, defined for `0 ≤ Mt‖d‖ₓ < 1`.
pub fn model_upper(ctx: &StepContext, t: f64) -> Result<f64> {
    let z = ctx.m * t * ctx.d_weighted_norm;
    if !(t >= 0.0) || z >= 1.0 {
        return Err(Error::Domain { name: "M·t·‖d‖ₓ", value: z, domain: "[0, 1)" });
    }
    Ok(t * ctx.g_dot_d + scaled_omega_star(ctx.m, t * ctx.d_weighted_norm))
}

/// Upper model sharpened by `L`-smoothness: equal to [`model_upper`] up to
/// `tᵘ = (1 − α)/(M‖d‖ₓ)` and continued by a quadratic beyond it.
pub fn model_upper_sa2(ctx: &StepContext, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain { name: "t", value: t, domain: "[0, ∞)" });
    }
    let alpha = ctx.alpha()?;
    let l = ctx.l.expect("alpha() checked L");
    let dx = ctx.d_weighted_norm;
    if ctx.m == 0.0 {
        return model_upper(ctx, t);
    }
    let tu = (1.0 - alpha) / (ctx.m * dx);
    if t <= tu {
        return model_upper(ctx, t);
    }
    let dt = t - tu;
    Ok(t * ctx.g_dot_d
        + scaled_omega_star(ctx.m, tu * dx)
        + tu * dt * dx * dx / (1.0 - ctx.m * tu * dx)
        + 0.5 * l * dt * dt * ctx.d_norm * ctx.d_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(g_dot_d: f64, dx: f64, m: f64, l: Option<f64>, d_norm: f64) -> StepContext {
        StepContext { g_dot_d, d_norm, d_weighted_norm: dx, m, l }
    }

    #[test]
    fn omega_values() {
        let ln2 = std::f64::consts::LN_2;
        assert_eq!(omega(0.0).unwrap(), 0.0);
        assert!((omega(1.0).unwrap() - (1.0 - ln2)).abs() < 1e-15);
        assert!((omega_star(0.5).unwrap() - (ln2 - 0.5)).abs() < 1e-15);
        assert!(omega(-1.0).is_err());
        assert!(omega_star(1.0).is_err());
        assert_eq!(omega_inv_upper(0.0).unwrap(), 0.0);
        assert_eq!(omega_inv_upper(2.0).unwrap(), 4.0);
        assert!(omega_inv_upper(-0.1).is_err());
    }

    #[test]
    fn series_matches_closed_form_near_cutoff() {
        for z in [0.99e-3, 1.01e-3] {
            let a = omega_unchecked(z);
            let b = z - z.ln_1p();
            assert!((a - b).abs() <= 1e-9 * b, "{z}");
            let a = omega_star_unchecked(z);
            let b = -z - (-z).ln_1p();
            assert!((a - b).abs() <= 1e-9 * b, "{z}");
        }
    }

    #[test]
    fn adaptive_examples() {
        assert_eq!(adaptive_step(&ctx(-1.0, 1.0, 0.0, None, 1.0)).unwrap().t, 1.0);
        let d = adaptive_step(&ctx(-1.0, 1.0, 1.0, None, 1.0)).unwrap();
        assert_eq!((d.eta, d.t), (Some(1.0), 0.5));
        let d = adaptive_step(&ctx(-4.0, 2.0, 0.5, None, 1.0)).unwrap();
        assert_eq!((d.eta, d.t), (Some(2.0), 0.5));
        assert!(adaptive_step(&ctx(1.0, 1.0, 1.0, None, 1.0)).is_err());
    }

    #[test]
    fn sa2_examples() {
        let d = sa2_step(&ctx(-1.0, 1.0, 1.0, Some(4.0), 1.0)).unwrap();
        assert_eq!((d.alpha, d.t, d.branch), (Some(0.5), 0.5, Branch::SelfConcordant));
        let d = sa2_step(&ctx(-1.0, 1.0, 1.0, Some(1.5625), 1.0)).unwrap();
        assert_eq!(d.branch, Branch::SmoothnessAided);
        assert!((d.t - 0.68).abs() < 1e-15);
        let d = sa2_step(&ctx(-3.0, 1.5, 1.0, Some(2.25), 1.0)).unwrap();
        assert!((d.t - 2.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn sa2_alpha_policy() {
        let tight = ctx(-1.0, 1.0 + 1e-12, 1.0, Some(1.0), 1.0);
        assert_eq!(sa2_step(&tight).unwrap().alpha, Some(1.0));
        let wrong = ctx(-1.0, 1.1, 1.0, Some(1.0), 1.0);
        assert!(matches!(sa2_step(&wrong), Err(Error::InconsistentConstants { .. })));
        assert!(sa2_step(&ctx(-1.0, 1.0, 1.0, None, 1.0)).is_err());
    }

    #[test]
    fn model_examples() {
        let c = ctx(-1.0, 1.0, 1.0, Some(1.0), 1.0);
        assert_eq!(model_upper(&c, 0.0).unwrap(), 0.0);
        assert!((model_upper(&c, 0.5).unwrap() - (-0.5 + std::f64::consts::LN_2 - 0.5)).abs() < 1e-15);
        assert!(model_upper(&c, 1.0).is_err());
        assert_eq!(model_upper_sa2(&c, 0.0).unwrap(), 0.0);
        // α = 1 collapses to the quadratic t·gᵀd + ½Lt²‖d‖².
        assert!((model_upper_sa2(&c, 2.0).unwrap() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn branch_round_trip() {
        for b in [Branch::SelfConcordant, Branch::SmoothnessAided, Branch::LineSearch] {
            assert_eq!(b.as_str().parse::<Branch>().unwrap(), b);
        }
    }
}
