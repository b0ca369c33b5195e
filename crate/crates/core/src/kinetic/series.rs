use crate::dynamics::{GroupKind, System};
use crate::error::Result;
use crate::hierarchy::{cumulant_term, guard, nested_term};
use crate::linalg::{trace_norm, Operator};

use super::limit::limit_system;
use super::KineticState;

/// Which series represents the one-particle state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    /// `Σ_n (1/n!) Tr 𝔄_{1+n}(t) F⁰_{1+n}` with the interacting groups at the spec's ε.
    FullCumulant,
    /// Nested free evolutions and unit-strength collision steps.
    Limit,
}

/// Truncated one-particle series through `state.order`, with the trace norm
/// of the last retained term.
pub fn one_particle_series(system: &System, t: f64, state: &KineticState, mode: SeriesMode) -> Result<(Operator, f64)> {
    let f = &state.f1;
    let mut acc = Operator::zeros(1, f.d());
    let mut last = 0.0;
    match mode {
        SeriesMode::FullCumulant => {
            guard(system, f, t)?;
            let prop = system.propagator(t);
            for n in 0..=state.order {
                let term = cumulant_term(&prop, GroupKind::Interacting, 1, n, &state.initial_entry(f, 1 + n)?)?;
                last = trace_norm(&term);
                acc = &acc + &term;
            }
        }
        SeriesMode::Limit => {
            let limit = limit_system(system)?;
            guard(&limit, f, t)?;
            for n in 0..=state.order {
                let term = nested_term(&limit, GroupKind::Free, 1.0, t, 1, &state.initial_entry(f, 1 + n)?)?;
                last = trace_norm(&term);
                acc = &acc + &term;
            }
        }
    }
    Ok((acc, last))
}
