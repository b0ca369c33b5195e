//! Scenario-driven verification runner: loads a model and initial data, runs
//! the requested suites, and writes a JSON report with CSV plot data.

pub mod app;
pub mod report;
pub mod scenario;
pub mod suites;

use rayon::prelude::*;

use report::Report;
use scenario::Scenario;
use suites::Suite;

/// Runs `suites` in the given order; `parallel` spreads them over threads
/// without changing the report.
pub fn run_scenario(scenario: &Scenario, suites: &[Suite], parallel: bool) -> Report {
    let records = if parallel {
        suites.par_iter().map(|&s| suites::run(s, scenario)).collect()
    } else {
        suites.iter().map(|&s| suites::run(s, scenario)).collect()
    };
    Report::new(records)
}
