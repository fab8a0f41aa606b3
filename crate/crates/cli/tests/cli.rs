use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use adabfgs_cli::check::cmd_check;
use adabfgs_cli::report::cmd_report;
use adabfgs_cli::run::{cmd_run, RunOptions, Summary, CACHE_ENV};
use adabfgs_cli::trace::{diag_path, list_traces, read_trace, write_trace, TRACE_COLUMNS};

const QUAD: &str = r#"
[run]
max_iters = 200
star_metrics = true

[matrix]
datasets = ["quad"]
methods = ["abfgs", "sa2bfgs", "lsbfgs"]
b0 = ["L_identity", "mu_identity"]

[datasets.quad]
kind = "quadratic"
dim = 6
cond = 50.0
"#;

/// Small separable-ish logistic problem in LIBSVM form.
fn write_toy_libsvm(dir: &Path) -> PathBuf {
    let mut text = String::new();
    for i in 0..40 {
        let label = if i % 3 == 0 { "-1" } else { "+1" };
        let a = ((i * 7) % 11) as f64 / 5.0 - 1.0;
        let b = ((i * 5) % 13) as f64 / 6.0 - 1.0;
        text.push_str(&format!("{label} 1:{a} 2:{b} 3:1\n"));
    }
    let path = dir.join("toy.svm");
    fs::write(&path, text).unwrap();
    path
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        // Reference solutions land in a per-test cache.
        std::env::set_var(CACHE_ENV, dir.path().join("cache"));
        Self { dir }
    }

    fn path(&self, p: &str) -> PathBuf {
        self.dir.path().join(p)
    }

    fn run(&self, config: &str, out: &str) -> anyhow::Result<Summary> {
        let cfg = self.path("config.toml");
        fs::write(&cfg, config).unwrap();
        cmd_run(&cfg, &RunOptions { out: self.path(out), threads: 1, allow_large: false })
    }
}

#[test]
fn minimal_quadratic_config_writes_one_trace() {
    let ws = Workspace::new();
    let cfg = r#"
[matrix]
datasets = ["quad"]
methods = ["abfgs"]
b0 = ["L_identity"]

[datasets.quad]
kind = "quadratic"
dim = 5
cond = 10.0
"#;
    let s = ws.run(cfg, "out").unwrap();
    assert_eq!(s.runs.len(), 1);
    let r = s.runs.values().next().unwrap();
    assert_eq!(r.termination.as_deref(), Some("grad_tol"));
    assert!(r.certified && r.error.is_none());
    let traces = list_traces(&ws.path("out")).unwrap();
    assert_eq!(traces.len(), 1);
    assert!(diag_path(&traces[0]).exists());

    let text = fs::read_to_string(&traces[0]).unwrap();
    assert!(text.starts_with("# schema=adabfgs-trace/1\n"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, TRACE_COLUMNS.join(","));
    assert_eq!(Summary::load(&ws.path("out")).unwrap(), s);
}

#[test]
fn traces_round_trip_bit_exactly_and_pass_checks() {
    let ws = Workspace::new();
    let s = ws.run(QUAD, "out").unwrap();
    assert_eq!(s.runs.len(), 6);
    for p in list_traces(&ws.path("out")).unwrap() {
        let t = read_trace(&p).unwrap();
        assert!(t.star.is_some(), "{}", t.meta.run_id);
        let again = ws.path("again");
        fs::create_dir_all(&again).unwrap();
        let copy = write_trace(&again, &t).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(&copy).unwrap());
        assert_eq!(read_trace(&copy).unwrap(), t);
        for w in t.records.windows(2) {
            assert!(w[1].f_value <= w[0].f_value);
        }
    }
    let report = cmd_check(&ws.path("out")).unwrap();
    assert!(report.passed(), "{}", report.render());
    assert!(ws.path("out/verdicts.json").exists());
    for r in &report.runs {
        assert!(r.certified);
        for (id, c) in &r.checks {
            assert_ne!(c.status, "violated", "{} {id}", r.run_id);
        }
    }
}

#[test]
fn logistic_accounting_matches_hand_counts() {
    let ws = Workspace::new();
    let data = write_toy_libsvm(ws.dir.path());
    let cfg = format!(
        "[run]\nmax_iters = 3\n\n[matrix]\ndatasets = [\"toy\"]\nmethods = [\"abfgs\", \"sa2bfgs\", \"lsbfgs\"]\n\
         b0 = [\"mu_identity\"]\n\n[datasets.toy]\nkind = \"libsvm\"\npath = {:?}\n",
        data.display().to_string()
    );
    let s = ws.run(&cfg, "out").unwrap();
    assert!(!s.datasets["toy"].reference_cached);
    for (id, r) in &s.runs {
        assert_eq!((r.iterations, r.termination.as_deref()), (3, Some("max_iters")), "{id}");
        let e = r.evals;
        if r.method == "lsbfgs" {
            let t = read_trace(&ws.path(&format!("out/{}", r.trace.as_ref().unwrap()))).unwrap();
            let probes: usize = t.records.iter().filter_map(|r| r.step.map(|s| s.probes)).sum();
            assert_eq!((e.values, e.gradients, e.hvps), (1 + probes, 1 + probes, 0));
            assert_eq!(e.algorithmic, 2 + 2 * probes);
        } else {
            assert_eq!((e.values, e.gradients, e.hvps, e.total, e.algorithmic), (4, 4, 3, 11, 7), "{id}");
        }
    }
    let again = ws.run(&cfg, "out2").unwrap();
    assert!(again.datasets["toy"].reference_cached);
    assert_eq!(again.datasets["toy"].f_star, s.datasets["toy"].f_star);
}

#[test]
fn vacuous_envelopes_do_not_fail_the_check() {
    let ws = Workspace::new();
    let data = write_toy_libsvm(ws.dir.path());
    let cfg = format!(
        "[run]\nstar_metrics = true\n\n[matrix]\ndatasets = [\"toy\"]\nmethods = [\"abfgs\"]\nb0 = [\"L_identity\"]\n\n\
         [datasets.toy]\nkind = \"libsvm\"\npath = {:?}\n",
        data.display().to_string()
    );
    ws.run(&cfg, "out").unwrap();
    let report = cmd_check(&ws.path("out")).unwrap();
    assert!(report.passed(), "{}", report.render());
    let r = &report.runs[0];
    let sup = &r.checks["superlinear_rate"];
    assert!(sup.vacuous > 0 && sup.violated == 0, "{sup:?}");
    assert!(report.render().contains("superlinear_rate: "));
}

#[test]
fn check_refuses_unknown_schema_and_missing_columns() {
    let ws = Workspace::new();
    ws.run(QUAD, "out").unwrap();
    let trace = list_traces(&ws.path("out")).unwrap().remove(0);
    let original = fs::read_to_string(&trace).unwrap();

    fs::write(&trace, original.replace("adabfgs-trace/1", "adabfgs-trace/9")).unwrap();
    let err = format!("{:#}", cmd_check(&ws.path("out")).unwrap_err());
    assert!(err.contains("unsupported schema"), "{err}");

    fs::write(&trace, original.replace(",psi_bar,", ",psi,")).unwrap();
    let err = format!("{:#}", cmd_check(&ws.path("out")).unwrap_err());
    assert!(err.contains("missing columns psi_bar"), "{err}");

    fs::write(&trace, &original).unwrap();
    fs::remove_file(diag_path(&trace)).unwrap();
    assert!(cmd_check(&ws.path("out")).is_err());
}

#[test]
fn report_emits_one_curve_per_method_and_b0() {
    let ws = Workspace::new();
    ws.run(QUAD, "out").unwrap();
    let files = cmd_report(&ws.path("out"), None).unwrap();
    let dats: Vec<&PathBuf> = files.iter().filter(|p| p.extension().is_some_and(|e| e == "dat")).collect();
    assert_eq!(dats.len(), 2 * 3 * 2);
    assert_eq!(files.iter().filter(|p| p.extension().is_some_and(|e| e == "gp")).count(), 2);
    for p in dats {
        let text = fs::read_to_string(p).unwrap();
        assert!(text.contains("y=gap"));
        let rows: Vec<(f64, f64)> = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| {
                let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|(_, g)| *g > 0.0));
    }
    let gp = fs::read_to_string(ws.path("out/plots/quad__L_identity.gp")).unwrap();
    assert!(gp.contains("set logscale y") && gp.contains("quad__L_identity__sa2bfgs.iter.dat"));
}

#[test]
fn report_without_optimal_value_plots_f_and_flags_it() {
    let ws = Workspace::new();
    ws.run(QUAD, "out").unwrap();
    for p in list_traces(&ws.path("out")).unwrap() {
        let mut t = read_trace(&p).unwrap();
        t.meta.f_star = None;
        for r in &mut t.records {
            r.gap = None;
            r.f_value = r.f_value.abs() + 1.0;
        }
        write_trace(&ws.path("out"), &t).unwrap();
    }
    let files = cmd_report(&ws.path("out"), Some(&ws.path("plots"))).unwrap();
    let text = fs::read_to_string(files.iter().find(|p| p.to_string_lossy().ends_with(".iter.dat")).unwrap()).unwrap();
    assert!(text.contains("optimal value unavailable"), "{text}");
}

#[test]
fn empty_directories_are_errors() {
    let ws = Workspace::new();
    fs::create_dir_all(ws.path("empty")).unwrap();
    assert!(cmd_report(&ws.path("empty"), None).is_err());
    assert!(cmd_check(&ws.path("empty")).is_err());
}

#[test]
fn large_problems_need_the_override() {
    let ws = Workspace::new();
    let cfg = QUAD.replace("dim = 6", "dim = 4001");
    let err = format!("{:#}", ws.run(&cfg, "out").unwrap_err());
    assert!(err.contains("--allow-large"), "{err}");
}

#[test]
fn binary_exit_codes() {
    let ws = Workspace::new();
    let bin = env!("CARGO_BIN_EXE_adabfgs");
    let cfg = ws.path("bad.toml");
    fs::write(&cfg, "[matrix]\ndatasets = []\nmethods = [\"abfgs\"]\nb0 = [\"mu_identity\"]\n[datasets]\n").unwrap();
    let out = Command::new(bin)
        .args(["run", "--config", cfg.to_str().unwrap(), "--out", ws.path("o").to_str().unwrap()])
        .env(CACHE_ENV, ws.path("cache"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("datasets is empty"));

    let good = ws.path("good.toml");
    fs::write(&good, QUAD).unwrap();
    let out = Command::new(bin)
        .args(["refsol", "--config", good.to_str().unwrap()])
        .env(CACHE_ENV, ws.path("cache"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("quad: n=6"));
}
