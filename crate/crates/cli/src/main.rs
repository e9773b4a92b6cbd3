use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tppar::io::{exit_code, load_spec, run, RunOptions, Status, Task};

/// Spectral solver for time-periodic parabolic problems on T x R^n and
/// T x R^n_+.
#[derive(Parser)]
#[command(name = "tppar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem specification (TOML).
    spec: PathBuf,
    /// Output directory for reports and fields.
    #[arg(short, long, default_value = "tppar-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Ellipticity, Agmon and complementing checks; per-mode grid checks.
    Check(Common),
    /// Solve and write the solution field and its norms.
    Solve(Common),
    /// Solve and report interior and boundary residuals.
    Verify(Common),
    /// Empirical a priori estimate ratios over a random ensemble.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the solver with the per-mode ODE oracle.
    OracleCompare(Common),
    /// Run the task list of the specification.
    Run(Common),
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("TPPAR_THREADS") {
        let n: usize = v.parse().with_context(|| format!("TPPAR_THREADS={v} is not a number"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let (common, opts) = match cli.command {
        Command::Check(c) => (c, RunOptions { tasks: Some(vec![Task::Check]), ..Default::default() }),
        Command::Solve(c) => (c, RunOptions { tasks: Some(vec![Task::Solve]), ..Default::default() }),
        Command::Verify(c) => (c, RunOptions { tasks: Some(vec![Task::Verify]), ..Default::default() }),
        Command::OracleCompare(c) => (c, RunOptions { tasks: Some(vec![Task::OracleCompare]), ..Default::default() }),
        Command::Sweep { common, samples, seed } => (
            common,
            RunOptions {
                tasks: Some(vec![Task::Sweep]),
                samples,
                seed,
            },
        ),
        Command::Run(c) => (c, RunOptions::default()),
    };
    let result = load_spec(&common.spec).and_then(|spec| run(&spec, &common.out, &opts));
    match result {
        Ok(summary) => {
            // Reports are on disk; a closed stdout is not an error.
            let mut out = std::io::stdout().lock();
            for o in &summary.outcomes {
                let tag = match o.status {
                    Status::Pass => "ok",
                    Status::ConditionFailure => "CONDITION FAILURE",
                    Status::NumericalFailure => "NUMERICAL FAILURE",
                    Status::InputError => "INPUT ERROR",
                };
                let _ = writeln!(out, "{}: {tag}: {}", o.task.name(), o.message);
                for a in &o.artifacts {
                    let _ = writeln!(out, "  wrote {}", common.out.join(a).display());
                }
            }
            ExitCode::from(summary.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
