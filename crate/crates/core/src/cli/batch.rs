//! Manifest-driven runs. Every run goes through the same parser as the
//! command line; runs execute concurrently but rows keep manifest order.

use super::commands::{execute, Status};
use super::{BatchArgs, Cli, Command, EXIT_CHECK_FAILED, EXIT_OK};
use crate::cost::CostOracle;
use crate::error::{Error, Result};
use crate::io::{Instance, Real};
use crate::min::min_bruteforce;
use crate::mot::solve_lp;
use clap::Parser;
use rayon::prelude::*;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Manifest {
    Runs { runs: Vec<Run> },
    List(Vec<Run>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    /// Instance (or verifier input) path, relative to the manifest.
    pub instance: PathBuf,
    /// `solve-mot`, `solve-min` or `verify`.
    pub command: String,
    /// Verifier name for `verify`.
    #[serde(default)]
    pub construction: Option<String>,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default)]
    pub reference_value: Option<Real>,
    #[serde(default)]
    pub tol: Option<Real>,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub instance: String,
    pub command: String,
    pub value: Option<f64>,
    pub reference_value: Option<f64>,
    pub abs_err: Option<f64>,
    pub queries: Option<usize>,
    pub wall_ms: f64,
    pub pass: bool,
}

fn argv(run: &Run, base: &Path, out: &Path) -> Vec<String> {
    let mut v = vec!["motlab".to_string(), run.command.clone()];
    if let Some(c) = &run.construction {
        v.push(c.clone());
    }
    v.push(base.join(&run.instance).to_string_lossy().into_owned());
    v.extend(run.args.iter().cloned());
    v.push("--out".into());
    v.push(out.to_string_lossy().into_owned());
    v
}

/// Brute-force or LP reference for commands that have one.
fn auto_reference(cmd: &Command) -> Option<f64> {
    let load = |p: &Path| -> Option<Instance> { Instance::from_json(&std::fs::read_to_string(p).ok()?).ok() };
    match cmd {
        Command::SolveMin(a) => {
            let inst = load(&a.instance)?;
            min_bruteforce(&inst.cost, &inst.weights_or_zero()).ok().map(|m| m.value)
        }
        Command::SolveMot(a) => {
            let inst = load(&a.instance)?;
            let cost: &CostOracle = &inst.cost;
            solve_lp(cost, inst.spec.as_ref()?).ok().map(|s| s.value)
        }
        _ => None,
    }
}

fn run_one(idx: usize, run: &Run, base: &Path, out_dir: &Path) -> Row {
    let stem = run.instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    let report_path = out_dir.join(format!("{idx:04}-{}-{stem}.json", run.command));
    let start = Instant::now();
    let parsed = Cli::try_parse_from(argv(run, base, &report_path))
        .map_err(|e| Error::InvalidInput(e.to_string()))
        .and_then(|cli| match cli.command {
            Command::Batch(_) => Err(Error::InvalidInput("nested batch".into())),
            c => Ok(c),
        });
    let result = parsed.and_then(|cmd| {
        let outcome = execute(&cmd)?;
        Ok((cmd, outcome))
    });
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut row = Row {
        instance: run.instance.to_string_lossy().into_owned(),
        command: run.command.clone(),
        value: None,
        reference_value: run.reference_value.map(|r| r.0),
        abs_err: None,
        queries: None,
        wall_ms,
        pass: false,
    };
    match result {
        Ok((cmd, outcome)) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
            let _ = std::fs::write(&report_path, text + "\n");
            if row.reference_value.is_none() {
                row.reference_value = auto_reference(&cmd);
            }
            row.value = outcome.value;
            row.queries = outcome.queries;
            let tol = run.tol.map_or(DEFAULT_TOL, |t| t.0);
            row.abs_err = match (row.value, row.reference_value) {
                (Some(v), Some(r)) => Some((v - r).abs()),
                _ => None,
            };
            row.pass = outcome.status == Status::Ok && row.abs_err.map_or(true, |e| e <= tol);
        }
        Err(e) => {
            let text = serde_json::json!({"error": e.to_string(), "exit_code": super::exit_code(&e)});
            let _ = std::fs::write(&report_path, text.to_string() + "\n");
        }
    }
    row
}

/// Runs every manifest entry; rows come back in manifest order.
pub fn run_manifest(runs: &[Run], base: &Path, out_dir: &Path, jobs: usize) -> Result<Vec<Row>> {
    std::fs::create_dir_all(out_dir)?;
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(pool.install(|| runs.par_iter().enumerate().map(|(i, run)| run_one(i, run, base, out_dir)).collect()))
}

fn opt(v: Option<f64>) -> String {
    v.map(Real::format).unwrap_or_default()
}

pub fn write_csv(rows: &[Row], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Internal(e.to_string()))?;
    let mut write = |rec: &[String]| w.write_record(rec).map_err(|e| Error::Internal(e.to_string()));
    write(
        &["instance", "command", "value", "reference_value", "abs_err", "queries", "wall_ms", "pass"].map(String::from),
    )?;
    for r in rows {
        write(&[
            r.instance.clone(),
            r.command.clone(),
            opt(r.value),
            opt(r.reference_value),
            opt(r.abs_err),
            r.queries.map(|q| q.to_string()).unwrap_or_default(),
            format!("{:.3}", r.wall_ms),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_batch(args: &BatchArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.manifest)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", args.manifest.display())))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
    let runs = match manifest {
        Manifest::Runs { runs } | Manifest::List(runs) => runs,
    };
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let rows = run_manifest(&runs, base, &args.out_dir, args.jobs)?;
    let csv_path = args.out_dir.join("summary.csv");
    write_csv(&rows, &csv_path)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} runs, {failed} failed; summary at {}", rows.len(), csv_path.display());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}
