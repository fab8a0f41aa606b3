//! `run` and `refsol`: execute an experiment matrix and write traces.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use adabfgs_core::data::{parse_libsvm_with_dim, CachedSolution, RefsolCache};
use adabfgs_core::diagnostics::{star_metrics, STAR_MAX_DIM};
use adabfgs_core::estimator::HessianEstimate;
use adabfgs_core::objective::{EvalCounts, LogisticObjective, Matrix, Objective, QuadraticObjective, Vector};
use adabfgs_core::solver::{run, solve_reference, InitialEstimate, Method, RunConfig, RunResult};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{B0Choice, Cell, Config, DatasetSpec, LARGE_DIM};
use crate::trace::{write_trace, RunMeta, StoredTrace};

pub const CACHE_ENV: &str = "ADABFGS_CACHE_DIR";
pub const DATA_ENV: &str = "ADABFGS_DATA_DIR";
pub const SUMMARY_SCHEMA: &str = "adabfgs-summary/1";
pub const SUMMARY_FILE: &str = "summary.json";
const REFERENCE_TAG: &str = "solve_reference/1";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub allow_large: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub datasets: BTreeMap<String, DatasetSummary>,
    pub runs: BTreeMap<String, RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_features: usize,
    pub mu: f64,
    pub l: f64,
    pub m: f64,
    pub f_star: f64,
    pub reference_cached: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub values: usize,
    pub gradients: usize,
    pub hvps: usize,
    /// Values, gradients, and Hessian-vector products combined.
    pub total: usize,
    /// Evaluations the method needs, excluding values computed only for
    /// the trace.
    pub algorithmic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dataset: String,
    pub method: String,
    pub b0: String,
    pub m_exponent: Option<u32>,
    pub l_exponent: Option<u32>,
    pub m: f64,
    pub l: f64,
    pub certified: bool,
    pub termination: Option<String>,
    pub detail: Option<String>,
    /// Set when the run could not be executed at all.
    pub error: Option<String>,
    pub iterations: usize,
    pub best_gap: Option<f64>,
    pub iterations_to_gap_1e_8: Option<usize>,
    pub iterations_to_gap_1e_9: Option<usize>,
    pub evals: EvalSummary,
    pub trace: Option<String>,
}

impl Summary {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let s: Summary = serde_json::from_str(&text)?;
        if s.schema != SUMMARY_SCHEMA {
            bail!("{}: unsupported schema {:?}", path.display(), s.schema);
        }
        Ok(s)
    }
}

/// A dataset ready for runs: the objective, its reference solution, and,
/// when star metrics are requested, the Hessian at the solution.
pub struct Target {
    pub name: String,
    pub objective: Box<dyn Objective>,
    pub reference: CachedSolution,
    pub reference_cached: bool,
    pub hess_star: Option<Matrix>,
}

impl Target {
    pub fn summary(&self) -> DatasetSummary {
        let c = self.objective.constants();
        DatasetSummary {
            n_features: self.objective.dim(),
            mu: c.mu,
            l: c.l,
            m: c.m,
            f_star: self.reference.f_star,
            reference_cached: self.reference_cached,
        }
    }
}

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".adabfgs-cache"))
}

fn resolve_path(path: &Path, base: &Path) -> PathBuf {
    let direct = if path.is_absolute() { path.to_path_buf() } else { base.join(path) };
    if direct.exists() {
        return direct;
    }
    if let (Some(dir), Some(name)) = (std::env::var_os(DATA_ENV), path.file_name()) {
        let alt = Path::new(&dir).join(name);
        if alt.exists() {
            return alt;
        }
    }
    direct
}

/// `½xᵀAx − 1ᵀx` with a diagonal `A` whose eigenvalues run geometrically
/// from 1 to `cond`.
pub fn sanity_quadratic(dim: usize, cond: f64) -> Result<QuadraticObjective> {
    let diag = Vector::from_fn(dim, |i, _| if dim == 1 { 1.0 } else { cond.powf(i as f64 / (dim - 1) as f64) });
    Ok(QuadraticObjective::new(Matrix::from_diagonal(&diag), Vector::from_element(dim, 1.0))?)
}

fn check_size(name: &str, n: usize, allow_large: bool) -> Result<()> {
    if n > LARGE_DIM {
        if !allow_large {
            bail!("dataset {name:?} has n = {n} > {LARGE_DIM}; dense estimators need --allow-large");
        }
        log::warn!("dataset {name:?}: n = {n}, dense estimators need about {} MB each", n * n * 16 / (1 << 20));
    }
    Ok(())
}

/// Builds the objective and an identity string for the reference cache.
/// Dimensions above the dense limit are refused before anything dense is
/// allocated unless `allow_large` is set.
pub fn load_objective(
    name: &str,
    spec: &DatasetSpec,
    base: &Path,
    allow_large: bool,
) -> Result<(Box<dyn Objective>, String)> {
    match spec {
        DatasetSpec::Libsvm { path, n_features } => {
            let path = resolve_path(path, base);
            let file = File::open(&path).with_context(|| format!("dataset {name:?}: opening {}", path.display()))?;
            let ds = parse_libsvm_with_dim(BufReader::new(file), *n_features)
                .with_context(|| format!("dataset {name:?}: parsing {}", path.display()))?;
            check_size(name, ds.n_features(), allow_large)?;
            let id = format!("libsvm {}", ds.content_hash());
            Ok((Box::new(LogisticObjective::new(ds)?), id))
        }
        DatasetSpec::Quadratic { dim, cond } => {
            check_size(name, *dim, allow_large)?;
            Ok((Box::new(sanity_quadratic(*dim, *cond)?), format!("quadratic dim={dim} cond={cond:?}")))
        }
    }
}

pub fn prepare_target(
    name: &str,
    spec: &DatasetSpec,
    base: &Path,
    cache: &RefsolCache,
    allow_large: bool,
    want_star: bool,
) -> Result<Target> {
    let (objective, id) = load_objective(name, spec, base, allow_large)?;
    let n = objective.dim();
    let key = RefsolCache::key(&id, REFERENCE_TAG);
    let (reference, reference_cached) = cache.get_or_compute(name, &key, || {
        log::info!("{name}: computing reference solution");
        let (x, f) = solve_reference(objective.as_ref())?;
        Ok(CachedSolution { x_star: x.iter().copied().collect(), f_star: f })
    })?;
    if reference.x_star.len() != n {
        bail!("dataset {name:?}: cached reference has dimension {}, expected {n}", reference.x_star.len());
    }
    let hess_star = if want_star && n <= STAR_MAX_DIM {
        objective.full_hessian(&Vector::from_vec(reference.x_star.clone())).transpose()?
    } else {
        if want_star {
            log::warn!("dataset {name:?}: n = {n} exceeds {STAR_MAX_DIM}, skipping star metrics");
        }
        None
    };
    Ok(Target { name: name.to_string(), objective, reference, reference_cached, hess_star })
}

/// Solver configuration for one matrix cell.
pub fn cell_config(cell: &Cell, target: &Target, cfg: &Config) -> (RunConfig, f64) {
    let c = target.objective.constants();
    let n = target.objective.dim();
    let scale = match cell.b0 {
        B0Choice::MuIdentity => c.mu,
        B0Choice::LIdentity => c.l,
    };
    let mut rc = RunConfig::new(cell.method, Vector::from_element(n, 1.0), InitialEstimate::ScaledIdentity(scale));
    rc.m = cell.m_exponent.map_or(0.0, |i| c.m / 10f64.powi(i as i32));
    rc.l = Some(cell.l_exponent.map_or(c.l, |j| c.l / 5f64.powi(j as i32)));
    rc.max_iters = cfg.run.max_iters;
    rc.grad_tol = cfg.run.grad_tol;
    rc.gap_tol = cfg.run.gap_tol;
    rc.f_star = Some(target.reference.f_star);
    rc.record_star_metrics = target.hess_star.is_some();
    (rc, scale)
}

fn is_certified(rc: &RunConfig, target: &Target) -> bool {
    let c = target.objective.constants();
    match rc.method {
        Method::LsBfgs => true,
        Method::ABfgs => rc.m >= c.m,
        Method::Sa2Bfgs => rc.m >= c.m && rc.l.is_some_and(|l| l >= c.l),
    }
}

fn eval_summary(r: &RunResult, e: &EvalCounts) -> EvalSummary {
    EvalSummary {
        values: e.values,
        gradients: e.gradients,
        hvps: e.hvps,
        total: e.total(),
        algorithmic: r.algorithmic_evals(e),
    }
}

/// Runs one cell and writes its trace. Errors are folded into the summary.
pub fn execute_cell(cell: &Cell, target: &Target, cfg: &Config, out: &Path) -> RunSummary {
    let (rc, scale) = cell_config(cell, target, cfg);
    let certified = is_certified(&rc, target);
    let mut summary = RunSummary {
        dataset: cell.dataset.clone(),
        method: cell.method.to_string(),
        b0: cell.b0.to_string(),
        m_exponent: cell.m_exponent,
        l_exponent: cell.l_exponent,
        m: rc.m,
        l: rc.l.unwrap_or(target.objective.constants().l),
        certified,
        termination: None,
        detail: None,
        error: None,
        iterations: 0,
        best_gap: None,
        iterations_to_gap_1e_8: None,
        iterations_to_gap_1e_9: None,
        evals: EvalSummary { values: 0, gradients: 0, hvps: 0, total: 0, algorithmic: 0 },
        trace: None,
    };
    let result = (|| -> Result<StoredTrace> {
        let obj = target.objective.as_ref();
        let res = run(obj, &rc)?;
        let (star, psi_tilde0) = match &target.hess_star {
            Some(h) => {
                let report = star_metrics(&res, h, &obj.constants())?;
                let psi = HessianEstimate::scaled_identity(obj.dim(), scale)?.potential_star(h)?;
                (Some(report.metrics), Some(psi))
            }
            None => (None, None),
        };
        summary.termination = Some(res.termination.to_string());
        summary.detail = res.detail.clone();
        summary.iterations = res.iterations_used;
        summary.best_gap = res.best_gap();
        summary.iterations_to_gap_1e_8 = res.iterations_to_gap(1e-8);
        summary.iterations_to_gap_1e_9 = res.iterations_to_gap(1e-9);
        summary.evals = eval_summary(&res, &res.evals);
        let meta = RunMeta {
            run_id: cell.run_id(),
            dataset: cell.dataset.clone(),
            method: cell.method,
            b0: cell.b0,
            b0_scale: scale,
            m: res.m,
            l: res.l,
            constants: obj.constants(),
            f_star: rc.f_star,
            psi_tilde0,
            certified,
            termination: res.termination,
            detail: res.detail.clone(),
        };
        Ok(StoredTrace { meta, records: res.records, star })
    })();
    match result.and_then(|t| write_trace(out, &t)) {
        Ok(path) => {
            summary.trace = path.file_name().map(|s| s.to_string_lossy().into_owned());
            log::info!(
                "{}: {} after {} iterations",
                cell.run_id(),
                summary.termination.as_deref().unwrap_or("?"),
                summary.iterations
            );
        }
        Err(e) => {
            log::error!("{}: {e:#}", cell.run_id());
            summary.error = Some(format!("{e:#}"));
        }
    }
    summary
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn prepare_all(cfg: &Config, base: &Path, allow_large: bool, threads: usize) -> Result<Vec<Target>> {
    let cache = RefsolCache::new(cache_dir());
    let pool = thread_pool(threads)?;
    pool.install(|| {
        cfg.matrix
            .datasets
            .par_iter()
            .map(|name| prepare_target(name, &cfg.datasets[name], base, &cache, allow_large, cfg.run.star_metrics))
            .collect()
    })
}

/// Executes the whole matrix. Configuration and dataset errors are returned;
/// failures of individual runs are recorded in the summary.
pub fn cmd_run(config_path: &Path, opts: &RunOptions) -> Result<Summary> {
    let (cfg, base) = Config::load(config_path)?;
    let targets = prepare_all(&cfg, &base, opts.allow_large, opts.threads)?;
    let by_name: BTreeMap<&str, &Target> = targets.iter().map(|t| (t.name.as_str(), t)).collect();
    let cells = cfg.cells(|d| by_name[d].objective.constants().m == 0.0)?;
    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let pool = thread_pool(opts.threads)?;
    let results: Vec<(String, RunSummary)> = pool.install(|| {
        cells.par_iter().map(|c| (c.run_id(), execute_cell(c, by_name[c.dataset.as_str()], &cfg, &opts.out))).collect()
    });
    let datasets = targets
        .iter()
        .map(|t| (t.name.clone(), t.summary()))
        .collect();
    let summary = Summary { schema: SUMMARY_SCHEMA.to_string(), datasets, runs: results.into_iter().collect() };
    let path = opts.out.join(SUMMARY_FILE);
    fs::write(&path, serde_json::to_string_pretty(&summary)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(summary)
}

/// Computes (or loads) the reference solution of every dataset in the config.
pub fn cmd_refsol(config_path: &Path, allow_large: bool, threads: usize) -> Result<BTreeMap<String, DatasetSummary>> {
    let (cfg, base) = Config::load(config_path)?;
    let targets = prepare_all(&cfg, &base, allow_large, threads)?;
    Ok(targets
        .iter()
        .map(|t| (t.name.clone(), t.summary()))
        .collect())
}
