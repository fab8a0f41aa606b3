//! `check`: replay every diagnostic over stored traces.
//!
//! Runs whose `M` and `L` are at least the objective's constants are
//! certified and gate the exit status. Runs with tuned-down constants sit
//! outside the hypotheses of the inequalities, so their verdicts are
//! reported but do not fail the check.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use adabfgs_core::diagnostics::{check_run, tally, CheckContext, CheckId, CheckTally};
use adabfgs_core::stepsize::LineSearchParams;
use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::trace::{list_traces, read_trace, StoredTrace};

pub const VERDICTS_FILE: &str = "verdicts.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub status: &'static str,
    pub checked: usize,
    pub satisfied: usize,
    pub vacuous: usize,
    pub violated: usize,
    pub first_violation: Option<usize>,
    pub worst_excess: f64,
}

impl From<&CheckTally> for CheckSummary {
    fn from(t: &CheckTally) -> Self {
        let status = if t.violated > 0 {
            "violated"
        } else if t.satisfied > 0 {
            "satisfied"
        } else {
            "vacuous"
        };
        Self {
            status,
            checked: t.checked,
            satisfied: t.satisfied,
            vacuous: t.vacuous,
            violated: t.violated,
            first_violation: t.first_violation,
            worst_excess: t.worst_excess,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunVerdicts {
    pub run_id: String,
    pub certified: bool,
    pub termination: String,
    pub checks: BTreeMap<String, CheckSummary>,
    /// Earliest violation over all checks, as `(check id, k)`.
    pub first_violation: Option<(String, usize)>,
}

impl RunVerdicts {
    pub fn fails(&self) -> bool {
        self.certified && self.first_violation.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub runs: Vec<RunVerdicts>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        !self.runs.iter().any(RunVerdicts::fails)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.runs {
            let kind = if r.certified { "certified" } else { "informational" };
            let _ = writeln!(out, "{} [{kind}, {}]", r.run_id, r.termination);
            for (id, c) in &r.checks {
                let _ = match c.first_violation {
                    Some(k) => writeln!(out, "  {id}: violated at iteration {k} ({} of {})", c.violated, c.checked),
                    None if c.vacuous > 0 => {
                        writeln!(out, "  {id}: {} ({} satisfied, {} vacuous)", c.status, c.satisfied, c.vacuous)
                    }
                    None => writeln!(out, "  {id}: {} ({})", c.status, c.checked),
                };
            }
        }
        let failing: Vec<&RunVerdicts> = self.runs.iter().filter(|r| r.fails()).collect();
        if failing.is_empty() {
            let _ = writeln!(out, "OK: no violations in {} certified runs", self.runs.iter().filter(|r| r.certified).count());
        } else {
            for r in failing {
                for (id, c) in r.checks.iter().filter(|(_, c)| c.violated > 0) {
                    let k = c.first_violation.unwrap_or_default();
                    let _ = writeln!(out, "FAIL: {} violates {id} at iteration {k}", r.run_id);
                }
            }
        }
        out
    }
}

pub fn check_stored(trace: &StoredTrace) -> RunVerdicts {
    let m = &trace.meta;
    let ctx = CheckContext {
        method: m.method,
        constants: m.constants,
        m: m.m,
        l: m.l,
        f_star: m.f_star,
        line_search: LineSearchParams::default(),
    };
    let verdicts = check_run(&trace.records, &ctx, m.psi_tilde0, trace.star.as_deref());
    let first_violation =
        verdicts.iter().filter(|v| v.is_violation()).min_by_key(|v| (v.k, v.id)).map(|v| (v.id.to_string(), v.k));
    let checks = tally(&verdicts).iter().map(|(id, t): (&CheckId, _)| (id.to_string(), t.into())).collect();
    RunVerdicts {
        run_id: m.run_id.clone(),
        certified: m.certified,
        termination: m.termination.to_string(),
        checks,
        first_violation,
    }
}

/// Checks every trace in `dir` and writes `verdicts.json` next to them.
pub fn cmd_check(dir: &Path) -> Result<CheckReport> {
    let paths = list_traces(dir)?;
    if paths.is_empty() {
        bail!("no traces in {}", dir.display());
    }
    let mut runs = Vec::with_capacity(paths.len());
    for p in &paths {
        runs.push(check_stored(&read_trace(p)?));
    }
    let report = CheckReport { runs };
    let path = dir.join(VERDICTS_FILE);
    fs::write(&path, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(report)
}
