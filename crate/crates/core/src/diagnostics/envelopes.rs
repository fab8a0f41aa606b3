use super::{value_slack, CheckContext, CheckId, Verdict};
use crate::solver::{IterationRecord, Method};

/// Constants entering the convergence envelopes of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    pub kappa: f64,
    /// `f(x₀) − f*`.
    pub delta: f64,
    /// `4M²Δ`.
    pub k1: f64,
    /// `4√(2ϰ)·M·√Δ`.
    pub k2: f64,
    /// Offset of the linear envelope.
    pub k3: f64,
    /// Iteration from which the linear envelope applies.
    pub k4: f64,
    /// `(1 + √2·M·√Δ)²`.
    pub gamma: f64,
    /// `Ψ(B₀/L)`.
    pub psi_bar0: f64,
    /// `Ψ(∇²f(x*)^{-1/2} B₀ ∇²f(x*)^{-1/2})`, when available.
    pub psi_tilde0: Option<f64>,
    /// `L₂/(2μ^{3/2})`.
    pub m_tilde: f64,
    /// Numerator of the superlinear envelope for both adaptive methods.
    pub d1: Option<f64>,
    /// Numerator of the superlinear envelope for the smoothness-aided method.
    pub d2: Option<f64>,
}

impl RateConstants {
    /// `(2 ln ϰ + 1)·K1` and `2√ϰ·K2`, whichever is smaller.
    pub fn phase_budget(&self) -> f64 {
        ((2.0 * self.kappa.ln() + 1.0) * self.k1).min(2.0 * self.kappa.sqrt() * self.k2)
    }

    /// Exponent offset of the second linear phase of the smoothness-aided method.
    pub fn second_phase_offset(&self) -> f64 {
        let g = self.gamma.min(self.kappa);
        (self.psi_bar0 + 1.0) * (2.0 * g.ln() + 1.0) + self.kappa * g * (self.gamma.ln().powi(2) + 24.0)
    }
}

pub fn rate_constants(ctx: &CheckContext, delta: f64, psi_bar0: f64, psi_tilde0: Option<f64>) -> RateConstants {
    let kappa = ctx.kappa();
    let m = ctx.m;
    let delta = delta.max(0.0);
    let sd = delta.sqrt();
    let k1 = 4.0 * m * m * delta;
    let k2 = 4.0 * (2.0 * kappa).sqrt() * m * sd;
    let lk = 2.0 * kappa.ln() + 1.0;
    let budget = (lk * k1).min(2.0 * kappa.sqrt() * k2);
    let k3 = budget / lk.min(2.0);
    let k4 = 2.0 * psi_bar0 + budget;
    let gamma = (1.0 + 2f64.sqrt() * m * sd).powi(2);
    let m_tilde = ctx.constants.m_tilde();
    let lead = 8.0 * 2f64.sqrt() * m_tilde * sd;
    let d1 = psi_tilde0.map(|pt| {
        let inner = (lk * m * m * delta).min(2.0 * 2f64.sqrt() * kappa * m * sd);
        pt + lead * (2.0 * psi_bar0 + 4.0 * inner + 13.0 * kappa)
    });
    let d2 = psi_tilde0.map(|pt| pt + lead * (2.0 * psi_bar0 + 1.0 + 4.0 * kappa * gamma.min(kappa)));
    RateConstants { kappa, delta, k1, k2, k3, k4, gamma, psi_bar0, psi_tilde0, m_tilde, d1, d2 }
}

fn envelope(id: CheckId, rec: &IterationRecord, gap: f64, gap0: f64, ln_bound: f64) -> Verdict {
    let bound = ln_bound.exp();
    let mut v = Verdict::new(id, rec.k, gap, bound * gap0, value_slack(rec.f_value));
    v.vacuous = ln_bound > 0.0;
    v
}

/// `(1 − a)^e` in log form.
fn ln_rate(a: f64, e: f64) -> f64 {
    e * (-a).ln_1p()
}

/// Checks `gapₖ/gap₀` against every envelope that applies to the method,
/// at every recorded `k` past the envelope's threshold.
pub fn check_envelopes(records: &[IterationRecord], rc: &RateConstants, ctx: &CheckContext) -> Vec<Verdict> {
    let mut out = Vec::new();
    let Some(gap0) = records.first().and_then(|r| r.gap).filter(|g| *g > 0.0) else {
        return out;
    };
    if !ctx.method.is_adaptive() {
        return out;
    }
    let kappa = rc.kappa;
    let gk = rc.gamma.min(kappa);
    let offset2 = rc.second_phase_offset();
    for rec in records {
        let Some(gap) = rec.gap else { continue };
        let k = rec.k as f64;
        if k >= rc.k4 {
            out.push(envelope(CheckId::LinearRate, rec, gap, gap0, ln_rate(1.0 / (6.0 * kappa), k - rc.k3)));
        }
        if k < 1.0 {
            continue;
        }
        if let Some(d1) = rc.d1 {
            out.push(envelope(CheckId::SuperlinearRate, rec, gap, gap0, k * (d1 / k).ln()));
        }
        if ctx.method != Method::Sa2Bfgs {
            continue;
        }
        let a = (-rc.psi_bar0 / k).exp() / (kappa * gk);
        out.push(envelope(CheckId::Sa2LinearRate, rec, gap, gap0, ln_rate(a, k)));
        if k >= 2.0 * rc.psi_bar0 {
            out.push(envelope(CheckId::Sa2LinearRateTail, rec, gap, gap0, ln_rate(1.0 / (2.0 * kappa * gk), k)));
        }
        let a = (-offset2 / k).exp() / kappa;
        out.push(envelope(CheckId::Sa2SecondLinearRate, rec, gap, gap0, ln_rate(a, k)));
        if k >= 2.0 * offset2 {
            out.push(envelope(CheckId::Sa2SecondLinearRateTail, rec, gap, gap0, ln_rate(1.0 / (2.0 * kappa), k)));
        }
        if let Some(d2) = rc.d2 {
            out.push(envelope(CheckId::Sa2SuperlinearRate, rec, gap, gap0, k * (d2 / k).ln()));
        }
    }
    out
}
