use crate::combinatorics::two_block_splits;
use crate::dynamics::System;
use crate::error::{Error, Result};
use crate::linalg::{embed, partial_trace, place, Direction, Operator};

use super::sequence::{Closure, OperatorSequence, SequenceKind};

/// The evolution equations whose right-hand sides can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyKind {
    VonNeumannHierarchy,
    DualBbgky,
    Bbgky,
    NonlinearBbgky,
    DualVlasov,
    VlasovHierarchy,
}

impl HierarchyKind {
    pub fn sequence_kind(self) -> SequenceKind {
        match self {
            Self::VonNeumannHierarchy => SequenceKind::Correlation,
            Self::DualBbgky | Self::DualVlasov => SequenceKind::ReducedObservable,
            Self::Bbgky | Self::VlasovHierarchy => SequenceKind::ReducedDensity,
            Self::NonlinearBbgky => SequenceKind::ReducedCorrelation,
        }
    }

    fn needs_next(self) -> bool {
        matches!(self, Self::Bbgky | Self::NonlinearBbgky | Self::VlasovHierarchy)
    }
}

/// `Σ_{(X1,X2)} Σ_{i∈X1, j∈X2} c·𝒩*_int(i,j) g_{|X1|}(X1) g_{|X2|}(X2)` over
/// unordered splits of `0..n`, restricted to splits accepted by `filter`.
fn split_sum(
    system: &System,
    seq: &OperatorSequence,
    n: usize,
    coupling: f64,
    mut orient: impl FnMut(&[usize], &[usize]) -> Option<(Vec<usize>, Vec<usize>)>,
    mut pairs: impl FnMut(&[usize], &[usize]) -> Vec<(usize, usize)>,
) -> Result<Operator> {
    let mut acc = Operator::zeros(n, seq.d());
    if n < 2 {
        return Ok(acc);
    }
    let labels: Vec<usize> = (0..n).collect();
    for (a, b) in two_block_splits(&labels)? {
        let Some((x1, x2)) = orient(&a, &b) else { continue };
        let e1 = seq.entry_or_zero(x1.len())?;
        let e2 = seq.entry_or_zero(x2.len())?;
        let prod = place(&[(&e1, &x1[..]), (&e2, &x2[..])], n)?;
        for (i, j) in pairs(&x1, &x2) {
            acc.add_assign_scaled(&system.interaction_term(&prod, i, j, Direction::State)?, coupling);
        }
    }
    Ok(acc)
}

fn all_pairs(x1: &[usize], x2: &[usize]) -> Vec<(usize, usize)> {
    x1.iter().flat_map(|&i| x2.iter().map(move |&j| (i, j))).collect()
}

/// `Tr_{s+1} Σ_{i≤s} c·𝒩*_int(i, s+1) Y` for `Y` on `s+1` particles.
fn collision(system: &System, y: &Operator, coupling: f64) -> Result<Operator> {
    let s = y.n_particles() - 1;
    let mut acc = Operator::zeros(s + 1, y.d());
    for i in 0..s {
        acc.add_assign_scaled(&system.interaction_term(y, i, s, Direction::State)?, coupling);
    }
    let keep: Vec<usize> = (0..s).collect();
    partial_trace(&acc, &keep)
}

/// `Σ_{j1≠j2} c·𝒩_int(j1,j2) B_{s−1}(S∖j1)`.
fn dual_coupling(system: &System, seq: &OperatorSequence, s: usize, coupling: f64) -> Result<Operator> {
    let mut acc = Operator::zeros(s, seq.d());
    if s < 2 {
        return Ok(acc);
    }
    let prev = seq.get(s - 1)?;
    for j1 in 0..s {
        let rest: Vec<usize> = (0..s).filter(|&j| j != j1).collect();
        let lifted = embed(prev, &rest, s)?;
        for &j2 in &rest {
            acc.add_assign_scaled(&system.interaction_term(&lifted, j1, j2, Direction::Observable)?, coupling);
        }
    }
    Ok(acc)
}

/// Right-hand side of the given hierarchy, entry by entry.
///
/// Equations coupling to the next entry are evaluated only where it is known:
/// up to the last entry of a finite sequence, one less for a truncated one.
pub fn hierarchy_rhs(system: &System, kind: HierarchyKind, seq: &OperatorSequence) -> Result<OperatorSequence> {
    seq.expect_kind(kind.sequence_kind())?;
    if seq.d() != system.d() {
        return Err(Error::DimensionMismatch { left: seq.d(), right: system.d() });
    }
    let eps = system.epsilon();
    let top = if kind.needs_next() && seq.closure() == Closure::Truncated {
        if seq.max_n() < 2 {
            return Err(Error::MissingEntry { n: seq.max_n() + 1 });
        }
        seq.max_n() - 1
    } else {
        seq.max_n()
    };
    let mut entries = vec![Operator::zeros(0, seq.d())];
    for s in 1..=top {
        let x = seq.get(s)?;
        let value = match kind {
            HierarchyKind::VonNeumannHierarchy => {
                let own = system.generator(x, Direction::State)?;
                let splits = split_sum(system, seq, s, eps, |a, b| Some((a.to_vec(), b.to_vec())), all_pairs)?;
                &own + &splits
            }
            HierarchyKind::DualBbgky => &system.generator(x, Direction::Observable)? + &dual_coupling(system, seq, s, eps)?,
            HierarchyKind::DualVlasov => {
                &system.free_generator(x, Direction::Observable)? + &dual_coupling(system, seq, s, 1.0)?
            }
            HierarchyKind::Bbgky => {
                &system.generator(x, Direction::State)? + &collision(system, &seq.entry_or_zero(s + 1)?, eps)?
            }
            HierarchyKind::VlasovHierarchy => {
                &system.free_generator(x, Direction::State)? + &collision(system, &seq.entry_or_zero(s + 1)?, 1.0)?
            }
            HierarchyKind::NonlinearBbgky => {
                let own = system.generator(x, Direction::State)?;
                let inner = split_sum(system, seq, s, eps, |a, b| Some((a.to_vec(), b.to_vec())), all_pairs)?;
                // splits of S ∪ {s+1} with the new particle in X2, interacting
                // through i ∈ X1 with the new particle only
                let new = s;
                let outer = split_sum(
                    system,
                    seq,
                    s + 1,
                    1.0,
                    |a, b| if b.contains(&new) { Some((a.to_vec(), b.to_vec())) } else { Some((b.to_vec(), a.to_vec())) },
                    |x1, _| x1.iter().map(|&i| (i, new)).collect(),
                )?;
                let next = seq.entry_or_zero(s + 1)?;
                let direct = {
                    let mut acc = Operator::zeros(s + 1, seq.d());
                    for i in 0..s {
                        acc = &acc + &system.interaction_term(&next, i, new, Direction::State)?;
                    }
                    acc
                };
                let keep: Vec<usize> = (0..s).collect();
                let traced = partial_trace(&(&direct + &outer), &keep)?.scale_real(eps);
                &(&own + &inner) + &traced
            }
        };
        entries.push(value);
    }
    Ok(OperatorSequence::from_parts(seq.kind(), seq.d(), entries, Closure::Truncated))
}
