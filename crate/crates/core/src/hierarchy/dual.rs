use crate::combinatorics::subsets;
use crate::dynamics::{GroupKind, System};
use crate::error::{Error, Result};
use crate::linalg::{embed, Direction, Operator, CONSTRUCTION_TOL};

use super::sequence::{OperatorSequence, SequenceKind};

/// Structure of a reduced observable sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "k")]
pub enum ObservableType {
    General,
    /// Only the one-particle entry is nonzero.
    Additive,
    /// Only the `k`-particle entry is nonzero.
    KAry(usize),
}

impl ObservableType {
    pub(crate) fn support(self) -> Option<usize> {
        match self {
            Self::General => None,
            Self::Additive => Some(1),
            Self::KAry(k) => Some(k),
        }
    }
}

pub(crate) fn check_support(b0: &OperatorSequence, hint: ObservableType) -> Result<()> {
    let Some(k) = hint.support() else { return Ok(()) };
    if k == 0 || k > b0.max_n() {
        return Err(Error::InconsistentHint(format!("no {k}-particle entry in a sequence of length {}", b0.max_n() + 1)));
    }
    let scale = b0.entries().iter().map(Operator::max_abs).fold(1.0, f64::max);
    for (n, e) in b0.entries().iter().enumerate() {
        if n != k && e.max_abs() > CONSTRUCTION_TOL * scale {
            return Err(Error::InconsistentHint(format!("entry {n} is nonzero but only entry {k} may be")));
        }
    }
    Ok(())
}

/// `B_s(t) = Σ_{J⊊S} 𝔄_{1+|J|}(t, {S∖J}, J) B⁰_{s−|J|}(S∖J)` with observable-direction cumulants.
pub fn dual_bbgky_solution(system: &System, t: f64, b0: &OperatorSequence, hint: ObservableType) -> Result<OperatorSequence> {
    b0.expect_kind(SequenceKind::ReducedObservable)?;
    check_support(b0, hint)?;
    let prop = system.propagator(t);
    let mut entries = vec![b0.get(0)?.clone()];
    for s in 1..=b0.max_n() {
        let all: Vec<usize> = (0..s).collect();
        let mut acc = Operator::zeros(s, b0.d());
        for kept in subsets(&all) {
            if kept.is_empty() || hint.support().is_some_and(|k| k != kept.len()) {
                continue;
            }
            let x = embed(b0.get(kept.len())?, &kept, s)?;
            let blocks: Vec<Vec<usize>> =
                std::iter::once(kept.clone()).chain(all.iter().filter(|j| !kept.contains(j)).map(|&j| vec![j])).collect();
            acc = &acc + &prop.cumulant(GroupKind::Interacting, &blocks, &x, Direction::Observable)?;
        }
        entries.push(acc);
    }
    Ok(OperatorSequence::from_parts(SequenceKind::ReducedObservable, b0.d(), entries, b0.closure()))
}
