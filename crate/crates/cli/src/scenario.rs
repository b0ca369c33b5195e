//! Scenario files: parsing, validation with field paths, and the built-in model.

use std::collections::BTreeMap;
use std::path::PathBuf;

use bbgky::dynamics::SystemSpec;
use bbgky::linalg::{serde_matrix, Operator};
use serde::Deserialize;

use crate::suites::Suite;

/// The reference scenario shipped with the tool.
pub const BUILTIN_CM1: &str = include_str!("../scenarios/cm1.json");

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(rename = "spec", deny_unknown_fields)]
struct RawSpec {
    d: usize,
    kinetic: Rows,
    interaction: Rows,
    epsilon: f64,
    n_max_particles: usize,
    series_order: usize,
}

#[derive(Debug, Deserialize)]
#[serde(rename = "initial_state", tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawInitial {
    Factorized { f1: Rows },
    Correlated { f1: Rows, g: Vec<Rows> },
    Explicit { densities: Vec<Rows> },
}

#[derive(Debug, Deserialize)]
#[serde(rename = "scenario", deny_unknown_fields)]
struct RawScenario {
    spec: RawSpec,
    initial_state: RawInitial,
    t_grid: Vec<f64>,
    #[serde(default)]
    suites: Vec<Suite>,
    eps_list: Vec<f64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

/// Initial data of a scenario.
#[derive(Debug, Clone)]
pub enum InitialState {
    /// Independent particles with one-particle density `f1`.
    Factorized(Operator),
    /// One-particle density with correlation kernel entries `g[i]` on `i + 2` particles.
    Correlated(Operator, Vec<Operator>),
    /// Densities `D_1, …, D_N` of a finite system.
    Explicit(Vec<Operator>),
}

impl InitialState {
    /// The one-particle density used by the kinetic suites.
    pub fn one_particle(&self) -> Operator {
        match self {
            Self::Factorized(f) | Self::Correlated(f, _) => f.clone(),
            Self::Explicit(d) => {
                let n = d.len();
                let keep = [0];
                let reduced = bbgky::linalg::partial_trace(&d[n - 1], &keep).expect("validated density");
                let tr = d[n - 1].trace().re;
                reduced.scale_real(1.0 / tr)
            }
        }
    }

    pub fn kernel(&self) -> Option<&[Operator]> {
        match self {
            Self::Correlated(_, g) => Some(g),
            _ => None,
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: SystemSpec,
    pub initial_state: InitialState,
    pub t_grid: Vec<f64>,
    pub suites: Vec<Suite>,
    pub eps_list: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
}

/// Why a scenario was not accepted.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    /// Not valid JSON or not of the expected shape.
    Parse { path: String, message: String },
    /// Well-formed but violating a model or scenario invariant.
    Validation { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Validation { path: path.into(), message: message.to_string() }
}

fn matrix(path: &str, rows: &Rows, n: usize, d: usize) -> Result<Operator, ScenarioError> {
    let m = serde_matrix::from_rows(rows).map_err(|e| invalid(path, e))?;
    Operator::new(n, d, m).map_err(|e| invalid(path, e))
}

fn density(path: &str, rows: &Rows, n: usize, d: usize) -> Result<Operator, ScenarioError> {
    let op = matrix(path, rows, n, d)?;
    op.check_density().map_err(|e| invalid(path, e))?;
    Ok(op)
}

fn hermitian(path: &str, rows: &Rows, n: usize, d: usize) -> Result<Operator, ScenarioError> {
    let op = matrix(path, rows, n, d)?;
    op.check_hermitian().map_err(|e| invalid(path, e))?;
    Ok(op)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawScenario = serde_path_to_error::deserialize(de)
            .map_err(|e| ScenarioError::Parse { path: e.path().to_string(), message: e.inner().to_string() })?;
        Self::validate(raw)
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_CM1).expect("the built-in scenario is valid")
    }

    fn validate(raw: RawScenario) -> Result<Self, ScenarioError> {
        let s = &raw.spec;
        let d = s.d;
        if d < 2 {
            return Err(invalid("spec.d", "one-particle dimension must be at least 2"));
        }
        let kinetic = hermitian("spec.kinetic", &s.kinetic, 1, d)?;
        let interaction = hermitian("spec.interaction", &s.interaction, 2, d)?;
        let spec = SystemSpec::new(kinetic, interaction, s.epsilon, s.n_max_particles, s.series_order).map_err(|e| {
            let message = e.to_string();
            let path = ["interaction", "epsilon", "n_max_particles"]
                .into_iter()
                .find(|field| message.contains(field))
                .map_or_else(|| "spec".to_string(), |field| format!("spec.{field}"));
            invalid(path, e)
        })?;
        let initial_state = match &raw.initial_state {
            RawInitial::Factorized { f1 } => InitialState::Factorized(density("initial_state.f1", f1, 1, d)?),
            RawInitial::Correlated { f1, g } => {
                let f1 = density("initial_state.f1", f1, 1, d)?;
                let g = g
                    .iter()
                    .enumerate()
                    .map(|(i, rows)| hermitian(&format!("initial_state.g[{i}]"), rows, i + 2, d))
                    .collect::<Result<Vec<_>, _>>()?;
                if g.is_empty() {
                    return Err(invalid("initial_state.g", "at least the two-particle kernel is required"));
                }
                InitialState::Correlated(f1, g)
            }
            RawInitial::Explicit { densities } => {
                if densities.is_empty() || densities.len() > spec.n_max_particles() {
                    return Err(invalid("initial_state.densities", "expected one density per particle number up to n_max_particles"));
                }
                let ops = densities
                    .iter()
                    .enumerate()
                    .map(|(i, rows)| density(&format!("initial_state.densities[{i}]"), rows, i + 1, d))
                    .collect::<Result<Vec<_>, _>>()?;
                InitialState::Explicit(ops)
            }
        };
        if raw.t_grid.is_empty() || raw.t_grid.iter().any(|t| !t.is_finite()) || raw.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("t_grid", "times must be finite and strictly increasing"));
        }
        if let Some(i) = raw.eps_list.iter().position(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(invalid(format!("eps_list[{i}]"), "ε values must be positive"));
        }
        if raw.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("eps_list", "ε values must be strictly decreasing"));
        }
        for (name, value) in &raw.tolerances {
            if !(value.is_finite() && *value > 0.0) {
                return Err(invalid(format!("tolerances.{name}"), "tolerances must be positive"));
            }
        }
        let mut seen = Vec::new();
        for (i, suite) in raw.suites.iter().enumerate() {
            if seen.contains(suite) {
                return Err(invalid(format!("suites[{i}]"), "suite listed twice"));
            }
            seen.push(*suite);
        }
        Ok(Scenario {
            spec,
            initial_state,
            t_grid: raw.t_grid,
            suites: raw.suites,
            eps_list: raw.eps_list,
            output_dir: raw.output_dir,
            tolerances: raw.tolerances,
        })
    }

    /// The scenario's override for `name`, or `default`.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}
