use std::path::PathBuf;
use std::process::ExitCode;

use adabfgs_cli::check::cmd_check;
use adabfgs_cli::report::cmd_report;
use adabfgs_cli::run::{cmd_refsol, cmd_run, RunOptions};
use clap::{Parser, Subcommand};

/// Adaptive BFGS experiment runner.
///
/// The reference-solution cache lives in $ADABFGS_CACHE_DIR (default
/// ./.adabfgs-cache). Relative dataset paths that do not exist are also
/// looked up in $ADABFGS_DATA_DIR.
#[derive(Parser)]
#[command(name = "adabfgs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment matrix and write one trace per run plus summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Permit dense estimators above n = 4000.
        #[arg(long)]
        allow_large: bool,
    },
    /// Replay the diagnostics over a trace directory.
    Check { dir: PathBuf },
    /// Write plot data and gnuplot scripts for a trace directory.
    Report {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute or load the reference solution of each configured dataset.
    Refsol {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        allow_large: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, threads, allow_large } => {
            cmd_run(&config, &RunOptions { out: out.clone(), threads, allow_large }).map(|s| {
                let failed = s.runs.values().filter(|r| r.error.is_some()).count();
                println!("{} runs written to {} ({failed} errored)", s.runs.len(), out.display());
                ExitCode::SUCCESS
            })
        }
        Command::Check { dir } => cmd_check(&dir).map(|report| {
            print!("{}", report.render());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }),
        Command::Report { dir, out } => cmd_report(&dir, out.as_deref()).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }),
        Command::Refsol { config, threads, allow_large } => cmd_refsol(&config, allow_large, threads).map(|sets| {
            for (name, d) in sets {
                let src = if d.reference_cached { "cached" } else { "computed" };
                println!("{name}: n={} f_star={:?} ({src})", d.n_features, d.f_star);
            }
            ExitCode::SUCCESS
        }),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
