//! Command-line front end: `run`, `selftest`, `cech`, `dirac` and `chern`.
//!
//! Exit codes: 0 on success, 1 on a configuration error, 2 when a task or
//! selftest check fails.

mod config;
mod json;
mod selftest;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{
    default_tolerance, ConfigError, RunConfig, Source, Synthetic, SyntheticValue, COVER_TASKS, DEFAULT_TOLERANCES,
    LAGRANGIAN_TASKS, METRIC_TASKS, SYNTHETIC_TASKS,
};
pub use json::{format_float, from_value, Json};
pub use selftest::{
    corpus, run_selftest, selftest_json, selftest_table, Measure, SelfCheck, SelfCheckResult, DEFAULT_SEED,
};
pub use tasks::{Check, Runner, Status, TaskOutcome, DENSE_SPECTRUM_LIMIT, LOWEST_EIGENVALUES};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "anholo", version, about = "Geometry of N-anholonomic manifolds: checks and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Multiplies every tolerance.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    tol_scale: f64,
    /// Compact JSON (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the tasks of a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the embedded invariant corpus and print a table.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
    /// Cohomology, cocycle and spin-obstruction report for a cover file.
    Cech {
        cover: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Dirac spectrum and Lichnerowicz residual for a config's metric and grid.
    Dirac {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Chern forms and integrals for a config's curvature source.
    Chern {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Runs every task of `cfg`. Returns the report and whether all tasks passed.
pub fn build_report(cfg: &RunConfig, seed: u64, tol_scale: f64) -> (Json, bool) {
    let outcomes = Runner::new(cfg, tol_scale, seed).run_all();
    let count = |s: Status| outcomes.iter().filter(|o| o.status == s).count();
    let checks: usize = outcomes.iter().map(|o| o.checks.len()).sum();
    let failed_checks: usize = outcomes.iter().map(|o| o.checks.iter().filter(|c| !c.pass()).count()).sum();
    let ok = count(Status::Pass) == outcomes.len();
    let report = Json::obj()
        .with("version", env!("CARGO_PKG_VERSION"))
        .with("seed", seed)
        .with("tol_scale", tol_scale)
        .with("config", from_value(&cfg.echo))
        .with("tasks", outcomes.iter().map(TaskOutcome::to_json).collect::<Vec<_>>())
        .with(
            "summary",
            Json::obj()
                .with("status", if ok { "pass" } else { "fail" })
                .with("tasks", outcomes.len())
                .with("passed", count(Status::Pass))
                .with("failed", count(Status::Fail))
                .with("errors", count(Status::Error))
                .with("checks", checks)
                .with("failed_checks", failed_checks),
        );
    (report, ok)
}

fn emit(report: &Json, common: &Common) -> Result<(), String> {
    let mut text = if common.pretty { report.to_pretty() } else { report.to_compact() };
    text.push('\n');
    match &common.out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_scale(common: &Common) -> Result<(), ConfigError> {
    if common.tol_scale > 0.0 && common.tol_scale.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid("--tol-scale must be positive".into()))
    }
}

/// Loads `path` and optionally replaces its task list.
fn load(path: &Path, tasks: Option<&[&str]>) -> Result<RunConfig, ConfigError> {
    let Some(tasks) = tasks else {
        return RunConfig::from_path(path);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    // the replaced task list is validated like a written one
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    if !value.is_object() {
        return Err(ConfigError::Syntax("config must be a JSON object".into()));
    }
    value["tasks"] = serde_json::Value::from(tasks.to_vec());
    RunConfig::parse(&value.to_string(), path.parent())
}

fn cover_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let doc = crate::cech::parse_cover(&text).map_err(|e| ConfigError::Invalid(format!("cover: {e}")))?;
    let mut tasks = vec!["cohomology"];
    if let Some(q) = &doc.cochain {
        tasks.push("cocycle");
        if q.group == crate::cech::Group::Orthogonal(3) {
            tasks.push("spin_obstruction");
        }
    }
    let inline: serde_json::Value = serde_json::from_str(&text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let value = serde_json::json!({"source": {"kind": "cover", "inline": inline}, "tasks": tasks});
    RunConfig::parse(&value.to_string(), None)
}

fn run_report(cfg: Result<RunConfig, ConfigError>, common: &Common) -> ExitCode {
    let cfg = match check_scale(common).and(cfg) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let (report, ok) = build_report(&cfg, common.seed, common.tol_scale);
    if let Err(e) = emit(&report, common) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    ExitCode::from(if ok { EXIT_OK } else { EXIT_FAILURE })
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            // help and version go to stdout and succeed; usage errors are config errors
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match cli.command {
        Command::Run { config, common } => run_report(load(&config, None), &common),
        Command::Cech { cover, common } => run_report(cover_config(&cover), &common),
        Command::Dirac { config, common } => run_report(load(&config, Some(&["dirac", "lichnerowicz"])), &common),
        Command::Chern { config, common } => run_report(load(&config, Some(&["chern"])), &common),
        Command::Selftest { common } => {
            let results = run_selftest(common.seed);
            let ok = results.iter().all(SelfCheckResult::pass);
            let table = selftest_table(&results);
            let json_requested = common.json || common.pretty || common.out.is_some();
            if json_requested {
                if let Err(e) = emit(&selftest_json(&results, common.seed), &common) {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            }
            // the table goes to stderr when stdout carries JSON
            if json_requested && common.out.is_none() {
                eprint!("{table}");
            } else {
                print!("{table}");
            }
            ExitCode::from(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}
