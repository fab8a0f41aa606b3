//! Experiment configuration.
//!
//! The format is TOML: a `[run]` section with the per-run budget, a
//! `[matrix]` section listing the axes, and one `[datasets.<name>]` table
//! per dataset. See `configs/` for complete examples.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use adabfgs_core::solver::{Method, DEFAULT_GRAD_TOL, DEFAULT_MAX_ITERS};
use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Dimension above which dense-estimator runs need `--allow-large`.
pub const LARGE_DIM: usize = 4000;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    pub matrix: MatrixSection,
    pub datasets: BTreeMap<String, DatasetSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub gap_tol: Option<f64>,
    /// Compute metrics under `∇²f(x*)` after each run (dense, `n ≤ 2000`).
    pub star_metrics: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { max_iters: DEFAULT_MAX_ITERS, grad_tol: DEFAULT_GRAD_TOL, gap_tol: None, star_metrics: false }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSection {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub b0: Vec<String>,
    /// Exponents `i` of the grid `M = M_obj / 10^i`.
    #[serde(default = "zero_grid")]
    pub m_exponents: Vec<u32>,
    /// Exponents `i` of the grid `L = L_obj / 5^i`.
    #[serde(default = "zero_grid")]
    pub l_exponents: Vec<u32>,
}

fn zero_grid() -> Vec<u32> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// Logistic regression on a LIBSVM file. Relative paths are resolved
    /// against the config file's directory.
    Libsvm { path: PathBuf, n_features: Option<usize> },
    /// `½xᵀAx − 1ᵀx` with `A` diagonal, eigenvalues spaced geometrically
    /// in `[1, cond]`.
    Quadratic { dim: usize, cond: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum B0Choice {
    MuIdentity,
    LIdentity,
}

impl B0Choice {
    pub fn as_str(&self) -> &'static str {
        match self {
            B0Choice::MuIdentity => "mu_identity",
            B0Choice::LIdentity => "L_identity",
        }
    }
}

impl fmt::Display for B0Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for B0Choice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu_identity" => Ok(B0Choice::MuIdentity),
            "L_identity" | "l_identity" => Ok(B0Choice::LIdentity),
            _ => bail!("unknown B0 choice {s:?} (expected mu_identity or L_identity)"),
        }
    }
}

/// One cell of the experiment matrix before constants are known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub dataset: String,
    pub method: Method,
    pub b0: B0Choice,
    pub m_exponent: Option<u32>,
    pub l_exponent: Option<u32>,
}

impl Cell {
    pub fn run_id(&self) -> String {
        let mut id = format!("{}__{}__{}", self.dataset, self.method, self.b0);
        if let Some(i) = self.m_exponent {
            id.push_str(&format!("__m{i}"));
        }
        if let Some(j) = self.l_exponent {
            id.push_str(&format!("__l{j}"));
        }
        id
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        for (axis, len) in [
            ("datasets", m.datasets.len()),
            ("methods", m.methods.len()),
            ("b0", m.b0.len()),
            ("m_exponents", m.m_exponents.len()),
            ("l_exponents", m.l_exponents.len()),
        ] {
            if len == 0 {
                bail!("matrix axis {axis} is empty");
            }
        }
        for d in &m.datasets {
            if !self.datasets.contains_key(d) {
                bail!("dataset {d:?} has no [datasets.{d}] table");
            }
            if d.contains("__") || d.contains(['/', '\\']) {
                bail!("dataset name {d:?} may not contain \"__\" or path separators");
            }
        }
        self.methods()?;
        self.b0_choices()?;
        if self.run.max_iters == 0 {
            bail!("run.max_iters must be positive");
        }
        if !(self.run.grad_tol > 0.0) {
            bail!("run.grad_tol must be positive");
        }
        for (name, spec) in &self.datasets {
            if let DatasetSpec::Quadratic { dim, cond } = spec {
                if *dim == 0 || !(*cond >= 1.0 && cond.is_finite()) {
                    bail!("dataset {name:?}: need dim ≥ 1 and finite cond ≥ 1");
                }
            }
        }
        Ok(())
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        dedup(self.matrix.methods.iter().map(|s| s.parse::<Method>().map_err(anyhow::Error::from)))
    }

    pub fn b0_choices(&self) -> Result<Vec<B0Choice>> {
        dedup(self.matrix.b0.iter().map(|s| s.parse::<B0Choice>()))
    }

    /// Expands the matrix. `M` only varies for the adaptive methods and `L`
    /// only for the smoothness-aided one; a dataset with `M_obj = 0` keeps a
    /// single `M` exponent since every grid point coincides.
    pub fn cells(&self, m_is_zero: impl Fn(&str) -> bool) -> Result<Vec<Cell>> {
        let methods = self.methods()?;
        let b0s = self.b0_choices()?;
        let mut m_exps = self.matrix.m_exponents.clone();
        m_exps.sort_unstable();
        m_exps.dedup();
        let mut l_exps = self.matrix.l_exponents.clone();
        l_exps.sort_unstable();
        l_exps.dedup();
        let mut cells = Vec::new();
        for dataset in &self.matrix.datasets {
            let m_grid: &[u32] = if m_is_zero(dataset) { &m_exps[..1] } else { &m_exps };
            for &b0 in &b0s {
                for &method in &methods {
                    let base = Cell { dataset: dataset.clone(), method, b0, m_exponent: None, l_exponent: None };
                    match method {
                        Method::LsBfgs => cells.push(base),
                        Method::ABfgs => {
                            cells.extend(m_grid.iter().map(|&i| Cell { m_exponent: Some(i), ..base.clone() }))
                        }
                        Method::Sa2Bfgs => {
                            for &i in m_grid {
                                for &j in &l_exps {
                                    cells.push(Cell { m_exponent: Some(i), l_exponent: Some(j), ..base.clone() });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

fn dedup<T: PartialEq>(items: impl Iterator<Item = Result<T>>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for item in items {
        let item = item?;
        if !out.contains(&item) {
            out.push(item);
        }
    }
    Ok(out)
}
