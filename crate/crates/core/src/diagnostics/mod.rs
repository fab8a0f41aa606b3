//! Replays the per-iteration inequalities, potential recurrence, phase
//! bounds, and rate envelopes against a recorded trace.
//!
//! Every check is a one-sided inequality `lhs ≤ rhs`. A [`Verdict`] carries
//! `excess = lhs − rhs`; it is satisfied when the excess is within the
//! tolerance for that check.

mod envelopes;
mod iteration;
mod phases;
mod potential;
mod star;

pub use envelopes::{check_envelopes, rate_constants, RateConstants};
pub use iteration::check_iteration;
pub use phases::{classify_phases, PhaseReport};
pub use potential::check_potential_recurrence;
pub use star::{star_metrics, star_verdicts, StarMetrics, StarReport, STAR_MAX_DIM};

use std::collections::BTreeMap;
use std::fmt;

use crate::objective::SmoothnessConstants;
use crate::solver::{IterationRecord, Method};
use crate::stepsize::LineSearchParams;

/// Slack for function-value inequalities, scaled by `1 + |f|`.
pub const VALUE_SLACK: f64 = 1e-12;
/// Slack for the potential recurrence.
pub const POTENTIAL_SLACK: f64 = 1e-8;
/// Slack for dimensionless ratios.
pub const RATIO_SLACK: f64 = 1e-10;

/// Absolute slack for comparisons between function values near `f`.
pub fn value_slack(f: f64) -> f64 {
    VALUE_SLACK * (1.0 + f.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckId {
    Monotone,
    Decrease,
    ArmijoHalf,
    CurvatureLower,
    CurvatureUpper,
    LineSearchArmijo,
    LineSearchWolfe,
    PotentialRecurrence,
    SmoothnessRatio,
    GradientDominance,
    PhaseCount,
    PhaseCosineSum,
    LinearRate,
    SuperlinearRate,
    Sa2LinearRate,
    Sa2LinearRateTail,
    Sa2SecondLinearRate,
    Sa2SecondLinearRateTail,
    Sa2SuperlinearRate,
    StarGradientDominance,
    StarSmoothnessRatio,
}

impl CheckId {
    pub const ALL: [CheckId; 21] = [
        CheckId::Monotone,
        CheckId::Decrease,
        CheckId::ArmijoHalf,
        CheckId::CurvatureLower,
        CheckId::CurvatureUpper,
        CheckId::LineSearchArmijo,
        CheckId::LineSearchWolfe,
        CheckId::PotentialRecurrence,
        CheckId::SmoothnessRatio,
        CheckId::GradientDominance,
        CheckId::PhaseCount,
        CheckId::PhaseCosineSum,
        CheckId::LinearRate,
        CheckId::SuperlinearRate,
        CheckId::Sa2LinearRate,
        CheckId::Sa2LinearRateTail,
        CheckId::Sa2SecondLinearRate,
        CheckId::Sa2SecondLinearRateTail,
        CheckId::Sa2SuperlinearRate,
        CheckId::StarGradientDominance,
        CheckId::StarSmoothnessRatio,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::Monotone => "monotone",
            CheckId::Decrease => "decrease",
            CheckId::ArmijoHalf => "armijo_half",
            CheckId::CurvatureLower => "curvature_lower",
            CheckId::CurvatureUpper => "curvature_upper",
            CheckId::LineSearchArmijo => "ls_armijo",
            CheckId::LineSearchWolfe => "ls_wolfe",
            CheckId::PotentialRecurrence => "potential_recurrence",
            CheckId::SmoothnessRatio => "smoothness_ratio",
            CheckId::GradientDominance => "gradient_dominance",
            CheckId::PhaseCount => "phase_count",
            CheckId::PhaseCosineSum => "phase_cosine_sum",
            CheckId::LinearRate => "linear_rate",
            CheckId::SuperlinearRate => "superlinear_rate",
            CheckId::Sa2LinearRate => "sa2_linear_rate",
            CheckId::Sa2LinearRateTail => "sa2_linear_rate_tail",
            CheckId::Sa2SecondLinearRate => "sa2_second_linear_rate",
            CheckId::Sa2SecondLinearRateTail => "sa2_second_linear_rate_tail",
            CheckId::Sa2SuperlinearRate => "sa2_superlinear_rate",
            CheckId::StarGradientDominance => "star_gradient_dominance",
            CheckId::StarSmoothnessRatio => "star_smoothness_ratio",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub id: CheckId,
    pub k: usize,
    pub satisfied: bool,
    /// `lhs − rhs`; positive values exceed the bound.
    pub excess: f64,
    /// The bound is at least the trivial one (envelopes above 1).
    pub vacuous: bool,
}

impl Verdict {
    pub(crate) fn new(id: CheckId, k: usize, lhs: f64, rhs: f64, tol: f64) -> Self {
        let excess = lhs - rhs;
        Self { id, k, satisfied: excess <= tol, excess, vacuous: false }
    }

    pub fn is_violation(&self) -> bool {
        !self.satisfied && !self.vacuous
    }
}

/// Everything the checks need to know about a run besides its records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckContext {
    pub method: Method,
    /// Constants of the objective (`μ`, and `M`, `L` for `M̃`).
    pub constants: SmoothnessConstants,
    /// `M` used by the run.
    pub m: f64,
    /// `L` used by the run and for the `P = L·I` weighting.
    pub l: f64,
    pub f_star: Option<f64>,
    pub line_search: LineSearchParams,
}

impl CheckContext {
    /// `L/μ` with the run's `L`.
    pub fn kappa(&self) -> f64 {
        self.l / self.constants.mu
    }
}

/// Tally of verdicts for one check id.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CheckTally {
    pub checked: usize,
    pub satisfied: usize,
    pub vacuous: usize,
    pub violated: usize,
    pub first_violation: Option<usize>,
    pub worst_excess: f64,
}

pub fn tally(verdicts: &[Verdict]) -> BTreeMap<CheckId, CheckTally> {
    let mut out: BTreeMap<CheckId, CheckTally> = BTreeMap::new();
    for v in verdicts {
        let t = out.entry(v.id).or_insert(CheckTally { worst_excess: f64::NEG_INFINITY, ..Default::default() });
        t.checked += 1;
        t.worst_excess = t.worst_excess.max(v.excess);
        if v.is_violation() {
            t.violated += 1;
            t.first_violation.get_or_insert(v.k);
        } else if v.vacuous {
            t.vacuous += 1;
        } else {
            t.satisfied += 1;
        }
    }
    out
}

/// Runs the step checks over every consecutive pair of records.
pub fn check_trace(records: &[IterationRecord], ctx: &CheckContext) -> Vec<Verdict> {
    records
        .windows(2)
        .filter(|w| w[0].step.is_some())
        .flat_map(|w| check_iteration(&w[0], &w[1], ctx).unwrap_or_default())
        .collect()
}

/// Every check that applies to a finished run: step checks, the potential
/// recurrence, and, once the gaps are filled, phase bounds and envelopes.
/// Star-metric verdicts are appended when `star` is given.
pub fn check_run(
    records: &[IterationRecord],
    ctx: &CheckContext,
    psi_tilde0: Option<f64>,
    star: Option<&[StarMetrics]>,
) -> Vec<Verdict> {
    let mut out = check_trace(records, ctx);
    out.extend(check_potential_recurrence(records, ctx));
    if ctx.method.is_adaptive() {
        if let Some(first) = records.first() {
            if let Some(delta) = first.gap {
                out.extend(classify_phases(records, ctx, delta).verdicts);
                if let Some(psi_bar0) = first.psi_bar {
                    let rc = rate_constants(ctx, delta, psi_bar0, psi_tilde0);
                    out.extend(check_envelopes(records, &rc, ctx));
                }
            }
        }
    }
    if let Some(metrics) = star {
        out.extend(star_verdicts(records, metrics));
    }
    out
}
