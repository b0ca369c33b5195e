//! Command-line surface and exit-code contract.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::report::Report;
use crate::scenario::{Scenario, ScenarioError};
use crate::suites::Suite;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_SUITE_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

const DEFAULT_OUTPUT_DIR: &str = "bbgky-out";

#[derive(Debug, Parser)]
#[command(name = "bbgky", version, about = "Numerical verification of quantum many-particle hierarchies")]
pub struct Cli {
    /// Output directory; overrides the scenario's `output_dir`.
    #[arg(long, global = true, env = "BBGKY_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    /// Run suites on several threads. The report is unchanged.
    #[arg(long, global = true)]
    pub parallel: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every suite listed in a scenario file.
    Run { scenario: PathBuf },
    /// Run one suite on a scenario (the built-in model by default).
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Rerun the ε sweeps with the given coupling values.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Epsilon,
}

/// Machine-readable error line written to stderr.
#[derive(Debug, Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    path: &'a str,
    message: &'a str,
}

fn diagnose(error: &str, path: &str, message: &str) {
    let line = serde_json::to_string(&Diagnostic { error, path, message }).expect("diagnostic serializes");
    eprintln!("{line}");
}

fn fail(err: &ScenarioError) -> i32 {
    match err {
        ScenarioError::Parse { path, message } => {
            diagnose("parse", path, message);
            EXIT_PARSE
        }
        ScenarioError::Validation { path, message } => {
            diagnose("validation", path, message);
            EXIT_VALIDATION
        }
    }
}

fn load(path: Option<&Path>) -> Result<Scenario, ScenarioError> {
    let Some(path) = path else { return Ok(Scenario::builtin()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Parse { path: String::new(), message: format!("{}: {e}", path.display()) })?;
    Scenario::parse(&text)
}

/// Entry point; returns the process exit code.
pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_PARSE
            } else {
                EXIT_PASS
            }
        }
    }
}

pub fn execute(cli: Cli) -> i32 {
    let (scenario, suites) = match &cli.command {
        Command::Run { scenario } => match load(Some(scenario)) {
            Ok(s) => {
                let suites = s.suites.clone();
                (s, suites)
            }
            Err(e) => return fail(&e),
        },
        Command::Verify { suite, scenario } => match load(scenario.as_deref()) {
            Ok(s) => (s, vec![*suite]),
            Err(e) => return fail(&e),
        },
        Command::Sweep { values, scenario, .. } => {
            let mut s = match load(scenario.as_deref()) {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
            if let Err(e) = check_sweep_values(values) {
                return fail(&e);
            }
            s.eps_list = values.clone();
            (s, vec![Suite::MeanfieldSweep, Suite::Chaos])
        }
    };
    let dir = cli.output_dir.clone().or_else(|| scenario.output_dir.clone()).unwrap_or_else(|| DEFAULT_OUTPUT_DIR.into());
    let report = crate::run_scenario(&scenario, &suites, cli.parallel);
    for r in &report.suites {
        let status = if r.passed() { "pass" } else { "FAIL" };
        println!("{:<24} {status}  {:.2}s", r.name.name(), r.runtime_s);
        for e in &r.errors {
            println!("  error: {e}");
        }
    }
    if let Err(e) = report.write(&dir) {
        diagnose("io", &dir.display().to_string(), &e.to_string());
        return EXIT_SUITE_FAILURE;
    }
    finish(&report)
}

fn finish(report: &Report) -> i32 {
    if report.passed() {
        return EXIT_PASS;
    }
    let failed: Vec<&str> = report.suites.iter().filter(|r| !r.passed()).map(|r| r.name.name()).collect();
    diagnose("suite_failure", "suites", &failed.join(","));
    EXIT_SUITE_FAILURE
}

fn check_sweep_values(values: &[f64]) -> Result<(), ScenarioError> {
    let invalid = |message: &str| ScenarioError::Validation { path: "--values".into(), message: message.into() };
    if values.len() < 3 {
        return Err(invalid("an ε sweep needs at least three values"));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) || values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("ε values must be positive and strictly decreasing"));
    }
    Ok(())
}
