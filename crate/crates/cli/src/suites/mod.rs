//! Verification suites run by the command-line tool.

mod kinetic;
mod oracle;
mod residuals;

use std::fmt;
use std::time::Instant;

use bbgky::dynamics::System;
use bbgky::hierarchy::{Closure, OperatorSequence, SequenceKind};
use bbgky::linalg::{c, Operator};
use serde::{Deserialize, Serialize};

use crate::report::SuiteRecord;
use crate::scenario::{InitialState, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    ClusterRoundtrip,
    OracleEquivState,
    OracleEquivObservable,
    Duality,
    Residuals,
    MeanfieldSweep,
    Chaos,
    GqkeCrosscheck,
    VlasovIc,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::ClusterRoundtrip,
        Suite::OracleEquivState,
        Suite::OracleEquivObservable,
        Suite::Duality,
        Suite::Residuals,
        Suite::MeanfieldSweep,
        Suite::Chaos,
        Suite::GqkeCrosscheck,
        Suite::VlasovIc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ClusterRoundtrip => "cluster_roundtrip",
            Suite::OracleEquivState => "oracle_equiv_state",
            Suite::OracleEquivObservable => "oracle_equiv_observable",
            Suite::Duality => "duality",
            Suite::Residuals => "residuals",
            Suite::MeanfieldSweep => "meanfield_sweep",
            Suite::Chaos => "chaos",
            Suite::GqkeCrosscheck => "gqke_crosscheck",
            Suite::VlasovIc => "vlasov_ic",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a suite sees of the scenario.
pub(crate) struct Context<'a> {
    pub scenario: &'a Scenario,
    pub system: System,
}

impl<'a> Context<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        Self { scenario, system: System::new(scenario.spec.clone()) }
    }

    pub fn d(&self) -> usize {
        self.scenario.spec.d()
    }

    pub fn n_max(&self) -> usize {
        self.scenario.spec.n_max_particles()
    }

    pub fn f1(&self) -> Operator {
        self.scenario.initial_state.one_particle()
    }

    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.scenario.tolerance(name, default)
    }

    /// Finite-N densities: `∏F₁` up to `n_max` particles unless given explicitly.
    pub fn finite_density(&self) -> bbgky::Result<OperatorSequence> {
        match &self.scenario.initial_state {
            InitialState::Explicit(d) => {
                let mut entries = vec![Operator::scalar(self.d(), c(1.0, 0.0))];
                entries.extend(d.iter().cloned());
                OperatorSequence::new(SequenceKind::Density, self.d(), entries, Closure::Finite)
            }
            _ => OperatorSequence::finite_product_state(&self.f1(), self.n_max(), self.n_max()),
        }
    }
}

/// Runs `suite`; library errors fail the record rather than aborting the run.
pub fn run(suite: Suite, scenario: &Scenario) -> SuiteRecord {
    let start = Instant::now();
    let ctx = Context::new(scenario);
    let mut rec = SuiteRecord::new(suite);
    let outcome = match suite {
        Suite::ClusterRoundtrip => oracle::cluster_roundtrip(&ctx, &mut rec),
        Suite::OracleEquivState => oracle::equiv_state(&ctx, &mut rec),
        Suite::OracleEquivObservable => oracle::equiv_observable(&ctx, &mut rec),
        Suite::Duality => oracle::duality(&ctx, &mut rec),
        Suite::Residuals => residuals::run(&ctx, &mut rec),
        Suite::MeanfieldSweep => kinetic::meanfield(&ctx, &mut rec),
        Suite::Chaos => kinetic::chaos(&ctx, &mut rec),
        Suite::GqkeCrosscheck => kinetic::gqke(&ctx, &mut rec),
        Suite::VlasovIc => kinetic::vlasov_ic(&ctx, &mut rec),
    };
    if let Err(e) = outcome {
        rec.fail(e);
    }
    rec.runtime_s = start.elapsed().as_secs_f64();
    rec
}
