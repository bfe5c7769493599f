//! `motlab` command line: solve-mot, solve-min, verify, batch.

mod batch;
mod commands;

pub use commands::{execute, Outcome};

use crate::error::Error;
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Parser, Debug, Clone)]
#[command(name = "motlab", version, about = "Multimarginal optimal transport and MIN-oracle reductions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Solve the MOT problem of an instance.
    SolveMot(SolveMotArgs),
    /// Solve MIN_C(p) for an instance.
    SolveMin(SolveMinArgs),
    /// Run a hardness-construction verifier.
    Verify(VerifyArgs),
    /// Run a manifest of commands and write a CSV summary.
    Batch(BatchArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Lp,
    Sinkhorn,
    Submodular,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ViaArg {
    Bruteforce,
    MotExact,
    MotApprox,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SolveMotArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "lp")]
    pub backend: BackendArg,
    /// Sinkhorn regularization strength.
    #[arg(long, default_value_t = 10.0)]
    pub eta: f64,
    /// Sinkhorn stopping tolerance on the summed l1 marginal error.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Round the coupling onto the transportation polytope.
    #[arg(long)]
    pub round: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SolveMinArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "bruteforce")]
    pub via: ViaArg,
    /// Oracle noise magnitude for mot-approx.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent mot-approx runs; the reported value is their median.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct VerifyArgs {
    /// clique | pairwise | twosat | supermodular (alias maxcut) | determinant | buckingham | gap | lipschitz
    pub construction: String,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Range for `gap`, e.g. `50..200` (inclusive).
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampled pairs for `lipschitz`.
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct BatchArgs {
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "batch-out")]
    pub out_dir: PathBuf,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::Infeasible(_) | Error::Unbounded | Error::Internal(_) | Error::Oracle(_) => EXIT_CHECK_FAILED,
        _ => EXIT_SCHEMA,
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Batch(args) => match batch::run_batch(&args) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
        other => match execute(&other) {
            Ok(outcome) => {
                let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
                let written = match out_path(&other) {
                    Some(path) => std::fs::write(path, text + "\n").map_err(Error::from),
                    None => {
                        use std::io::Write;
                        // a closed pipe downstream is not our failure
                        let _ = writeln!(std::io::stdout().lock(), "{text}");
                        Ok(())
                    }
                };
                if let Err(e) = written {
                    eprintln!("error: {e}");
                    return exit_code(&e);
                }
                outcome.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    }
}

fn out_path(cmd: &Command) -> Option<&PathBuf> {
    match cmd {
        Command::SolveMot(a) => a.out.as_ref(),
        Command::SolveMin(a) => a.out.as_ref(),
        Command::Verify(a) => a.out.as_ref(),
        Command::Batch(_) => None,
    }
}
