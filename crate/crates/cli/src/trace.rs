//! Trace files.
//!
//! Each run writes `<run_id>.csv` with the fixed column set below and a
//! companion `<run_id>.diag.csv` holding the remaining per-step fields the
//! checks need. Both start with `#` metadata lines; the first one names the
//! schema version. Floats are written in shortest round-trip form, so a
//! trace read back is bit-identical to the one written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use adabfgs_core::diagnostics::StarMetrics;
use adabfgs_core::objective::{EvalCounts, SmoothnessConstants};
use adabfgs_core::solver::{IterationRecord, Method, StepRecord, Termination};
use adabfgs_core::stepsize::Branch;
use anyhow::{anyhow, bail, Context, Result};

use crate::config::B0Choice;

pub const TRACE_SCHEMA: &str = "adabfgs-trace/1";
pub const DIAG_SCHEMA: &str = "adabfgs-diag/1";

pub const TRACE_COLUMNS: [&str; 13] = [
    "k",
    "f",
    "gap",
    "grad_norm",
    "t",
    "eta",
    "alpha",
    "branch",
    "cos_theta_hat",
    "m_hat",
    "y_dot_s",
    "psi_bar",
    "in_I_inf",
];

pub const DIAG_COLUMNS: [&str; 18] = [
    "k",
    "q_hat",
    "values",
    "gradients",
    "hvps",
    "predicted_decrease",
    "g_dot_d",
    "g_next_dot_d",
    "g_dot_s",
    "s_norm",
    "y_norm_sq_over_ys",
    "probes",
    "cos_theta_star",
    "m_hat_star",
    "g_pinv_g_star",
    "q_hat_star",
    "ratio_star",
    "c_k",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub run_id: String,
    pub dataset: String,
    pub method: Method,
    pub b0: B0Choice,
    pub b0_scale: f64,
    /// `M` and `L` the run used (`L` also weights the diagnostics).
    pub m: f64,
    pub l: f64,
    pub constants: SmoothnessConstants,
    pub f_star: Option<f64>,
    /// `Ψ̃(B₀)` under `∇²f(x*)`, when star metrics were computed.
    pub psi_tilde0: Option<f64>,
    /// The run's `M` and `L` are at least the objective's certified constants.
    pub certified: bool,
    pub termination: Termination,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredTrace {
    pub meta: RunMeta,
    pub records: Vec<IterationRecord>,
    pub star: Option<Vec<StarMetrics>>,
}

fn fmt_f(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn meta_lines(schema: &str, meta: &RunMeta) -> String {
    let c = &meta.constants;
    let mut pairs: Vec<(&str, String)> = vec![
        ("schema", schema.to_string()),
        ("run_id", meta.run_id.clone()),
        ("dataset", meta.dataset.clone()),
        ("method", meta.method.to_string()),
        ("b0", meta.b0.to_string()),
        ("b0_scale", fmt_f(meta.b0_scale)),
        ("m", fmt_f(meta.m)),
        ("l", fmt_f(meta.l)),
        ("obj_mu", fmt_f(c.mu)),
        ("obj_l", fmt_f(c.l)),
        ("obj_m", fmt_f(c.m)),
        ("obj_l2", fmt_opt(c.l2)),
        ("f_star", fmt_opt(meta.f_star)),
        ("psi_tilde0", fmt_opt(meta.psi_tilde0)),
        ("certified", meta.certified.to_string()),
        ("termination", meta.termination.to_string()),
    ];
    if let Some(d) = &meta.detail {
        pairs.push(("detail", d.replace(['\n', '\r'], " ")));
    }
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "# {k}={v}");
    }
    out
}

fn csv_body(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

pub fn trace_path(dir: &Path, run_id: &str) -> PathBuf {
    dir.join(format!("{run_id}.csv"))
}

pub fn diag_path(trace: &Path) -> PathBuf {
    let stem = trace.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    trace.with_file_name(format!("{stem}.diag.csv"))
}

/// Writes both files and returns the path of the main trace.
pub fn write_trace(dir: &Path, trace: &StoredTrace) -> Result<PathBuf> {
    let path = trace_path(dir, &trace.meta.run_id);
    let main_rows = trace.records.iter().map(|r| {
        let s = r.step.as_ref();
        vec![
            r.k.to_string(),
            fmt_f(r.f_value),
            fmt_opt(r.gap),
            fmt_f(r.grad_norm),
            fmt_opt(s.map(|s| s.t)),
            fmt_opt(s.and_then(|s| s.eta)),
            fmt_opt(s.and_then(|s| s.alpha)),
            s.map(|s| s.branch.to_string()).unwrap_or_default(),
            fmt_opt(s.map(|s| s.cos_theta_hat)),
            fmt_opt(s.map(|s| s.m_hat)),
            fmt_opt(s.map(|s| s.y_dot_s)),
            fmt_opt(r.psi_bar),
            s.and_then(|s| s.in_i_infinity).map(|b| if b { "1" } else { "0" }.to_string()).unwrap_or_default(),
        ]
    });
    let text = meta_lines(TRACE_SCHEMA, &trace.meta) + &csv_body(&TRACE_COLUMNS, main_rows)?;
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;

    let star: BTreeMap<usize, &StarMetrics> =
        trace.star.iter().flatten().map(|m| (m.k, m)).collect();
    let diag_rows = trace.records.iter().map(|r| {
        let s = r.step.as_ref();
        let st = star.get(&r.k);
        vec![
            r.k.to_string(),
            fmt_opt(r.q_hat),
            r.evals.values.to_string(),
            r.evals.gradients.to_string(),
            r.evals.hvps.to_string(),
            fmt_opt(s.and_then(|s| s.predicted_decrease)),
            fmt_opt(s.map(|s| s.g_dot_d)),
            fmt_opt(s.map(|s| s.g_next_dot_d)),
            fmt_opt(s.map(|s| s.g_dot_s)),
            fmt_opt(s.map(|s| s.s_norm)),
            fmt_opt(s.map(|s| s.y_norm_sq_over_ys)),
            s.map(|s| s.probes.to_string()).unwrap_or_default(),
            fmt_opt(st.map(|m| m.cos_theta)),
            fmt_opt(st.map(|m| m.m_hat)),
            fmt_opt(st.map(|m| m.g_pinv_g)),
            fmt_opt(st.and_then(|m| m.q_hat)),
            fmt_opt(st.map(|m| m.ratio)),
            fmt_opt(st.and_then(|m| m.c_k)),
        ]
    });
    let diag = diag_path(&path);
    let text = meta_lines(DIAG_SCHEMA, &trace.meta) + &csv_body(&DIAG_COLUMNS, diag_rows)?;
    fs::write(&diag, text).with_context(|| format!("writing {}", diag.display()))?;
    Ok(path)
}

/// Main trace files in `dir`, sorted by name.
pub fn list_traces(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
        if name.ends_with(".csv") && !name.ends_with(".diag.csv") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

struct Table {
    meta: BTreeMap<String, String>,
    rows: Vec<BTreeMap<String, String>>,
}

fn read_table(path: &Path, schema: &str, columns: &[&str]) -> Result<Table> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut meta = BTreeMap::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') {
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    match meta.get("schema") {
        Some(s) if s == schema => {}
        Some(s) => bail!("{}: unsupported schema {s:?} (expected {schema})", path.display()),
        None => bail!("{}: missing schema line", path.display()),
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let missing: Vec<&str> = columns.iter().copied().filter(|c| !header.iter().any(|h| h == c)).collect();
    if !missing.is_empty() {
        bail!("{}: missing columns {}", path.display(), missing.join(", "));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        rows.push(header.iter().cloned().zip(rec.iter().map(str::to_string)).collect());
    }
    Ok(Table { meta, rows })
}

fn field<'a>(row: &'a BTreeMap<String, String>, name: &str) -> &'a str {
    row.get(name).map(String::as_str).unwrap_or("")
}

fn parse_opt<T: std::str::FromStr>(s: &str, what: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|e| anyhow!("bad {what} {s:?}: {e}"))
    }
}

fn parse_req<T: std::str::FromStr>(s: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    parse_opt(s, what)?.ok_or_else(|| anyhow!("missing {what}"))
}

fn parse_meta(m: &BTreeMap<String, String>) -> Result<RunMeta> {
    let get = |k: &str| m.get(k).map(String::as_str).unwrap_or("");
    let constants = SmoothnessConstants::new(
        parse_req(get("obj_mu"), "obj_mu")?,
        parse_req(get("obj_l"), "obj_l")?,
        parse_req(get("obj_m"), "obj_m")?,
        parse_opt(get("obj_l2"), "obj_l2")?,
    )?;
    Ok(RunMeta {
        run_id: parse_req(get("run_id"), "run_id")?,
        dataset: parse_req(get("dataset"), "dataset")?,
        method: get("method").parse()?,
        b0: get("b0").parse()?,
        b0_scale: parse_req(get("b0_scale"), "b0_scale")?,
        m: parse_req(get("m"), "m")?,
        l: parse_req(get("l"), "l")?,
        constants,
        f_star: parse_opt(get("f_star"), "f_star")?,
        psi_tilde0: parse_opt(get("psi_tilde0"), "psi_tilde0")?,
        certified: parse_req(get("certified"), "certified")?,
        termination: get("termination").parse()?,
        detail: m.get("detail").cloned(),
    })
}

fn parse_flag(s: &str) -> Result<Option<bool>> {
    match s {
        "" => Ok(None),
        "1" => Ok(Some(true)),
        "0" => Ok(Some(false)),
        _ => bail!("bad in_I_inf {s:?}"),
    }
}

/// Reads a trace and its companion file back into solver records.
pub fn read_trace(path: &Path) -> Result<StoredTrace> {
    let main = read_table(path, TRACE_SCHEMA, &TRACE_COLUMNS)?;
    let diag_file = diag_path(path);
    let diag = read_table(&diag_file, DIAG_SCHEMA, &DIAG_COLUMNS)?;
    let meta = parse_meta(&main.meta).with_context(|| format!("{}: metadata", path.display()))?;
    if diag.rows.len() != main.rows.len() {
        bail!("{}: {} rows but the trace has {}", diag_file.display(), diag.rows.len(), main.rows.len());
    }
    let mut records = Vec::with_capacity(main.rows.len());
    let mut star = Vec::new();
    for (i, (r, d)) in main.rows.iter().zip(&diag.rows).enumerate() {
        let row_err = || format!("{}: data row {}", path.display(), i + 1);
        let k: usize = parse_req(field(r, "k"), "k").with_context(row_err)?;
        if k != i || field(d, "k") != field(r, "k") {
            bail!("{}: rows are not numbered 0, 1, 2, ... (found k={k} at row {})", path.display(), i + 1);
        }
        let rec = (|| -> Result<IterationRecord> {
            let step = match parse_opt::<f64>(field(r, "t"), "t")? {
                None => None,
                Some(t) => Some(StepRecord {
                    t,
                    eta: parse_opt(field(r, "eta"), "eta")?,
                    alpha: parse_opt(field(r, "alpha"), "alpha")?,
                    branch: parse_req::<Branch>(field(r, "branch"), "branch")?,
                    predicted_decrease: parse_opt(field(d, "predicted_decrease"), "predicted_decrease")?,
                    g_dot_d: parse_req(field(d, "g_dot_d"), "g_dot_d")?,
                    g_next_dot_d: parse_req(field(d, "g_next_dot_d"), "g_next_dot_d")?,
                    g_dot_s: parse_req(field(d, "g_dot_s"), "g_dot_s")?,
                    s_norm: parse_req(field(d, "s_norm"), "s_norm")?,
                    cos_theta_hat: parse_req(field(r, "cos_theta_hat"), "cos_theta_hat")?,
                    m_hat: parse_req(field(r, "m_hat"), "m_hat")?,
                    y_dot_s: parse_req(field(r, "y_dot_s"), "y_dot_s")?,
                    y_norm_sq_over_ys: parse_req(field(d, "y_norm_sq_over_ys"), "y_norm_sq_over_ys")?,
                    in_i_infinity: parse_flag(field(r, "in_I_inf"))?,
                    probes: parse_req(field(d, "probes"), "probes")?,
                }),
            };
            Ok(IterationRecord {
                k,
                f_value: parse_req(field(r, "f"), "f")?,
                gap: parse_opt(field(r, "gap"), "gap")?,
                q_hat: parse_opt(field(d, "q_hat"), "q_hat")?,
                grad_norm: parse_req(field(r, "grad_norm"), "grad_norm")?,
                psi_bar: parse_opt(field(r, "psi_bar"), "psi_bar")?,
                evals: EvalCounts {
                    values: parse_req(field(d, "values"), "values")?,
                    gradients: parse_req(field(d, "gradients"), "gradients")?,
                    hvps: parse_req(field(d, "hvps"), "hvps")?,
                },
                step,
            })
        })()
        .with_context(row_err)?;
        if let Some(ratio) = parse_opt::<f64>(field(d, "ratio_star"), "ratio_star").with_context(row_err)? {
            star.push(StarMetrics {
                k,
                cos_theta: parse_req(field(d, "cos_theta_star"), "cos_theta_star").with_context(row_err)?,
                m_hat: parse_req(field(d, "m_hat_star"), "m_hat_star").with_context(row_err)?,
                g_pinv_g: parse_req(field(d, "g_pinv_g_star"), "g_pinv_g_star").with_context(row_err)?,
                q_hat: parse_opt(field(d, "q_hat_star"), "q_hat_star").with_context(row_err)?,
                ratio,
                c_k: parse_opt(field(d, "c_k"), "c_k").with_context(row_err)?,
            });
        }
        records.push(rec);
    }
    if records.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(StoredTrace { meta, records, star: (!star.is_empty()).then_some(star) })
}
