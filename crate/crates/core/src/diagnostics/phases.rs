use super::{CheckContext, CheckId, Verdict, RATIO_SLACK};
use crate::solver::IterationRecord;

/// Split of iterations by `Mηₖ < 1` with prefix bounds on the complement.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    /// `Mηₖ < 1` per step.
    pub in_i_infinity: Vec<bool>,
    /// Prefix counts of steps outside `I_∞`; entry `k` covers steps `0..k`.
    pub outside_counts: Vec<usize>,
    /// Prefix sums of `cos θ̂` over steps outside `I_∞`.
    pub outside_cos_sums: Vec<f64>,
    /// `4M²Δ`.
    pub count_bound: f64,
    /// `4√(2ϰ)·M·√Δ`.
    pub cos_sum_bound: f64,
    pub verdicts: Vec<Verdict>,
}

/// Classifies every step and checks both prefix bounds. `delta` is `f(x₀) − f*`.
pub fn classify_phases(records: &[IterationRecord], ctx: &CheckContext, delta: f64) -> PhaseReport {
    let m = ctx.m;
    let count_bound = 4.0 * m * m * delta;
    let cos_sum_bound = 4.0 * (2.0 * ctx.kappa()).sqrt() * m * delta.sqrt();
    let mut flags = Vec::new();
    let mut counts = vec![0];
    let mut sums = vec![0.0];
    let mut verdicts = Vec::new();
    for rec in records {
        let Some(step) = &rec.step else { break };
        let inside = step.in_i_infinity.unwrap_or_else(|| step.eta.is_some_and(|e| m * e < 1.0));
        flags.push(inside);
        let (mut c, mut s) = (*counts.last().unwrap(), *sums.last().unwrap());
        if !inside {
            c += 1;
            s += step.cos_theta_hat;
        }
        counts.push(c);
        sums.push(s);
        let k = rec.k + 1;
        verdicts.push(Verdict::new(CheckId::PhaseCount, k, c as f64, count_bound, 0.0));
        verdicts.push(Verdict::new(CheckId::PhaseCosineSum, k, s, cos_sum_bound, RATIO_SLACK * (1.0 + s.abs())));
    }
    PhaseReport {
        in_i_infinity: flags,
        outside_counts: counts,
        outside_cos_sums: sums,
        count_bound,
        cos_sum_bound,
        verdicts,
    }
}
