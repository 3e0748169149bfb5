use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use fic_cli::{load_suite, render_suite, run_suite};

const EXIT_RUN_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Fractal impedance control experiments.
#[derive(Parser)]
#[command(version, about, arg_required_else_help = true)]
struct Cli {
    /// Run the invariant self-test battery and exit.
    #[arg(long)]
    check: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a suite file.
    Run {
        /// Suite file (TOML, one table per experiment).
        suite: PathBuf,
        /// Output directory for traces, summary.csv and manifest.json.
        #[arg(long, required_unless_present = "list")]
        out: Option<PathBuf>,
        /// Override the physics sub-step of every experiment (s).
        #[arg(long, value_name = "S")]
        physics_dt: Option<f64>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1, value_name = "N")]
        jobs: usize,
        /// Print the fully resolved suite and exit.
        #[arg(long)]
        list: bool,
    },
}

fn check() -> ExitCode {
    let results = fic_core::check::run_all();
    let mut failed = 0;
    for c in &results {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} checks passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_RUN_FAILURE)
    }
}

fn run(suite: PathBuf, out: Option<PathBuf>, physics_dt: Option<f64>, jobs: usize, list: bool) -> Result<ExitCode> {
    let mut specs = match load_suite(&suite) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    if let Some(h) = physics_dt {
        for spec in &mut specs {
            spec.sim.physics_dt = h;
            if let Err(e) = spec.validate() {
                eprintln!("error: experiment `{}` with --physics-dt {h}: {e}", spec.name);
                return Ok(ExitCode::from(EXIT_CONFIG));
            }
        }
    }
    if specs.is_empty() {
        eprintln!("warning: {} defines no experiments", suite.display());
    }
    if list {
        print!("{}", render_suite(&specs));
        return Ok(ExitCode::SUCCESS);
    }
    let Some(out) = out else {
        anyhow::bail!("--out is required");
    };
    if specs.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    let report = run_suite(&specs, &out, jobs)?;
    for (name, msg) in &report.failures {
        eprintln!("run `{name}` failed: {msg}");
    }
    println!("{} experiments, {} failed, results in {}", specs.len(), report.failures.len(), out.display());
    Ok(if report.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_RUN_FAILURE) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.check {
        return check();
    }
    let result = match cli.command {
        Some(Command::Run { suite, out, physics_dt, jobs, list }) => run(suite, out, physics_dt, jobs, list),
        None => return ExitCode::SUCCESS,
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUN_FAILURE)
        }
    }
}
