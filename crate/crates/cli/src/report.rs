//! `report`: plot data for gap-versus-iterations and gap-versus-evaluations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};

use crate::config::B0Choice;
use crate::trace::{list_traces, read_trace, StoredTrace};

/// Gap used to rank the tuned runs of one curve.
pub const TARGET_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub dataset: String,
    pub b0: B0Choice,
    pub method: String,
    pub run_id: String,
    /// `false` when no optimal value was available and `f` is plotted.
    pub is_gap: bool,
    /// `(k, cumulative evaluations, y)`.
    pub points: Vec<(usize, usize, f64)>,
}

/// Ranks runs: reaching the target gap sooner wins, then a lower best gap.
fn rank(t: &StoredTrace) -> (usize, f64) {
    let gaps = t.records.iter().filter_map(|r| r.gap);
    let hit = t.records.iter().find(|r| r.gap.is_some_and(|g| g <= TARGET_GAP)).map(|r| r.k);
    (hit.unwrap_or(usize::MAX), gaps.fold(f64::INFINITY, f64::min))
}

fn curve(t: &StoredTrace) -> Result<Curve> {
    let is_gap = t.meta.f_star.is_some() && t.records.iter().all(|r| r.gap.is_some());
    let mut points = Vec::new();
    for r in &t.records {
        let y = if is_gap { r.gap.unwrap() } else { r.f_value };
        if !(y > 0.0) {
            break;
        }
        points.push((r.k, r.evals.total(), y));
    }
    ensure!(points.iter().all(|p| p.2 > 0.0 && p.2.is_finite()), "{}: non-positive value in curve", t.meta.run_id);
    Ok(Curve {
        dataset: t.meta.dataset.clone(),
        b0: t.meta.b0,
        method: t.meta.method.to_string(),
        run_id: t.meta.run_id.clone(),
        is_gap,
        points,
    })
}

/// Best-tuned curve per `(dataset, B0, method)`.
pub fn best_curves(traces: &[StoredTrace]) -> Result<Vec<Curve>> {
    let mut best: BTreeMap<(String, B0Choice, String), &StoredTrace> = BTreeMap::new();
    for t in traces {
        let key = (t.meta.dataset.clone(), t.meta.b0, t.meta.method.to_string());
        let replace = match best.get(&key) {
            None => true,
            Some(cur) => {
                let (a, b) = (rank(t), rank(cur));
                a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
            }
        };
        if replace {
            best.insert(key, t);
        }
    }
    best.values().map(|t| curve(t)).collect()
}

fn data_file(c: &Curve, by_evals: bool) -> String {
    let y = if c.is_gap { "gap" } else { "f (optimal value unavailable)" };
    let x = if by_evals { "evaluations" } else { "iteration" };
    let mut s = format!("# run_id={}\n# x={x} y={y}\n", c.run_id);
    for &(k, e, v) in &c.points {
        let _ = writeln!(s, "{} {v:?}", if by_evals { e } else { k });
    }
    s
}

fn gnuplot_stub(stem: &str, curves: &[&Curve]) -> String {
    let mut s = String::from("set logscale y\nset format y \"%.0e\"\nset key top right\n");
    for (suffix, xlabel) in [("iter", "iterations"), ("evals", "function value, gradient, and HVP evaluations")] {
        let ylabel = if curves.iter().all(|c| c.is_gap) { "f(x) - f*" } else { "f(x)" };
        let _ = writeln!(s, "\nset terminal pngcairo size 800,600\nset output \"{stem}.{suffix}.png\"");
        let _ = writeln!(s, "set xlabel \"{xlabel}\"\nset ylabel \"{ylabel}\"");
        let plots: Vec<String> = curves
            .iter()
            .map(|c| format!("\"{}__{}__{}.{suffix}.dat\" using 1:2 with lines title \"{}\"", c.dataset, c.b0, c.method, c.method))
            .collect();
        let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    }
    s
}

/// Writes `.dat` files per curve and a gnuplot script per `(dataset, B0)`
/// into `out` (default `<dir>/plots`). Returns the files written.
pub fn cmd_report(dir: &Path, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    let paths = list_traces(dir)?;
    if paths.is_empty() {
        bail!("no traces in {}", dir.display());
    }
    let traces = paths.iter().map(|p| read_trace(p)).collect::<Result<Vec<_>>>()?;
    let curves = best_curves(&traces)?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join("plots"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    let mut groups: BTreeMap<(String, B0Choice), Vec<&Curve>> = BTreeMap::new();
    for c in &curves {
        if !c.is_gap {
            log::warn!("{}: no optimal value, plotting f instead of the gap", c.run_id);
        }
        for (suffix, by_evals) in [("iter", false), ("evals", true)] {
            let path = out.join(format!("{}__{}__{}.{suffix}.dat", c.dataset, c.b0, c.method));
            fs::write(&path, data_file(c, by_evals))?;
            written.push(path);
        }
        groups.entry((c.dataset.clone(), c.b0)).or_default().push(c);
    }
    for ((dataset, b0), group) in groups {
        let stem = format!("{dataset}__{b0}");
        let path = out.join(format!("{stem}.gp"));
        fs::write(&path, gnuplot_stub(&stem, &group))?;
        written.push(path);
    }
    Ok(written)
}
