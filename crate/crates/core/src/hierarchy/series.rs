use crate::combinatorics::{all_set_partitions, factorial};
use crate::dynamics::{GroupKind, Propagator, System};
use crate::error::{Error, Result};
use crate::linalg::{c, operator_norm, partial_trace, place, trace_norm, Direction, Operator};

use super::clusters::{block_product, cluster_correlation};
use super::sequence::{Closure, OperatorSequence, SequenceKind};

/// Which expansion generates the reduced densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesRoute {
    /// Cumulants of groups applied to the initial reduced densities.
    Cumulant,
    /// Traces of evolved correlations of a particle cluster with further particles.
    ViaCorrelations,
}

/// How reduced correlation operators are obtained.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "t")]
pub enum CorrelationMode {
    /// Cumulants of given reduced densities.
    FromReduced,
    /// Series over cumulants of groups for factorized initial data.
    ChaosSeries(f64),
    /// Traces of evolved correlation operators.
    ViaCorrelations(f64),
}

/// A series-evaluated sequence with the trace norm of the last retained term
/// for every entry (zero when the series terminates exactly).
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub sequence: OperatorSequence,
    pub tail: Vec<f64>,
}

/// `t₀ = 1 / (2 ε ‖Φ‖ ‖F₁⁰‖₁)`; infinite without interaction.
pub fn convergence_radius(system: &System, f1: &Operator) -> f64 {
    let strength = system.epsilon() * operator_norm(system.spec().interaction()) * trace_norm(f1);
    if strength == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (2.0 * strength)
    }
}

pub(crate) fn guard(system: &System, f1: &Operator, t: f64) -> Result<()> {
    let t0 = convergence_radius(system, f1);
    if t.abs() >= t0 {
        return Err(Error::ConvergenceGuard { t, t0 });
    }
    Ok(())
}

/// Particle numbers `s` and their maximal expansion orders for `f0`.
pub(crate) fn series_plan(system: &System, f0: &OperatorSequence) -> Result<Vec<(usize, usize)>> {
    let max = f0.max_n();
    match f0.closure() {
        Closure::Finite => Ok((1..=max).map(|s| (s, max - s)).collect()),
        Closure::Truncated => {
            let order = system.spec().series_order();
            if max < 1 + order {
                return Err(Error::TruncationOverflow { needed: 1 + order, available: max });
            }
            let top = system.spec().n_max_particles().min(max - order);
            Ok((1..=top).map(|s| (s, order)).collect())
        }
    }
}

fn singletons(from: usize, to: usize) -> impl Iterator<Item = Vec<usize>> {
    (from..to).map(|j| vec![j])
}

/// `(1/n!) Tr_{s+1..s+n} 𝔄_{1+n}(t, {1..s}, s+1, …, s+n) F_{s+n}`.
pub(crate) fn cumulant_term(prop: &Propagator<'_>, kind: GroupKind, s: usize, n: usize, x: &Operator) -> Result<Operator> {
    let blocks: Vec<Vec<usize>> = std::iter::once((0..s).collect()).chain(singletons(s, s + n)).collect();
    let y = prop.cumulant(kind, &blocks, x, Direction::State)?;
    let keep: Vec<usize> = (0..s).collect();
    Ok(partial_trace(&y, &keep)?.scale_real(1.0 / factorial(n)))
}

fn with_vacuum(d: usize, mut rest: Vec<Operator>) -> Vec<Operator> {
    rest.insert(0, Operator::scalar(d, c(1.0, 0.0)));
    rest
}

/// Reduced densities at time `t` from initial reduced densities `f0`.
pub fn bbgky_series_solution(system: &System, t: f64, f0: &OperatorSequence, route: SeriesRoute) -> Result<SeriesSolution> {
    f0.expect_kind(SequenceKind::ReducedDensity)?;
    let plan = series_plan(system, f0)?;
    if f0.closure() == Closure::Truncated {
        guard(system, f0.get(1)?, t)?;
    }
    let prop = system.propagator(t);
    let g0 = match route {
        SeriesRoute::Cumulant => None,
        SeriesRoute::ViaCorrelations => Some(super::clusters::density_to_clusters(&f0.clone().with_kind(SequenceKind::Density))?),
    };
    let mut entries = Vec::with_capacity(plan.len());
    let mut tail = vec![0.0];
    for &(s, order) in &plan {
        let keep: Vec<usize> = (0..s).collect();
        let mut acc = Operator::zeros(s, f0.d());
        let mut last = 0.0;
        for n in 0..=order {
            let term = match &g0 {
                None => cumulant_term(&prop, GroupKind::Interacting, s, n, f0.get(s + n)?)?,
                Some(g) => {
                    let y = evolve_cluster_correlation(&prop, g, s, n)?;
                    partial_trace(&y, &keep)?.scale_real(1.0 / factorial(n))
                }
            };
            last = trace_norm(&term);
            acc = &acc + &term;
        }
        tail.push(if f0.closure() == Closure::Finite { 0.0 } else { last });
        entries.push(acc);
    }
    let sequence =
        OperatorSequence::from_parts(SequenceKind::ReducedDensity, f0.d(), with_vacuum(f0.d(), entries), f0.closure());
    Ok(SeriesSolution { sequence, tail })
}

/// `g_s(t) = Σ_P 𝔄_{|P|}(t, X_1, …) ∏ g⁰_{|X_j|}(X_j)` for every stored `s`.
pub fn evolve_correlations(system: &System, t: f64, g0: &OperatorSequence) -> Result<OperatorSequence> {
    g0.expect_kind(SequenceKind::Correlation)?;
    let prop = system.propagator(t);
    let mut entries = vec![g0.get(0)?.clone()];
    for s in 1..=g0.max_n() {
        entries.push(evolve_plain(&prop, g0, s)?);
    }
    Ok(OperatorSequence::from_parts(SequenceKind::Correlation, g0.d(), entries, Closure::Truncated))
}

fn evolve_plain(prop: &Propagator<'_>, g0: &OperatorSequence, s: usize) -> Result<Operator> {
    let labels: Vec<usize> = (0..s).collect();
    let mut acc = Operator::zeros(s, g0.d());
    for p in all_set_partitions(&labels) {
        let x = block_product(p.blocks(), &labels, g0.d(), |k| g0.get(k).cloned())?;
        acc = &acc + &prop.cumulant(GroupKind::Interacting, p.blocks(), &x, Direction::State)?;
    }
    Ok(acc)
}

/// `g_{1+n}(t, {1..s}, s+1, …, s+n)`: the evolved correlation of the cluster
/// `{1..s}`, regarded as one particle, with `n` further particles.
pub fn evolve_cluster_correlations(system: &System, t: f64, g0: &OperatorSequence, s: usize, n_max: usize) -> Result<Vec<Operator>> {
    g0.expect_kind(SequenceKind::Correlation)?;
    let prop = system.propagator(t);
    (0..=n_max).map(|n| evolve_cluster_correlation(&prop, g0, s, n)).collect()
}

fn evolve_cluster_correlation(prop: &Propagator<'_>, g0: &OperatorSequence, s: usize, n: usize) -> Result<Operator> {
    let total = s + n;
    let cluster: Vec<usize> = (0..s).collect();
    // item 0 is the cluster, item j ≥ 1 the particle s + j − 1
    let items: Vec<usize> = (0..=n).collect();
    let theta = |item: usize| -> Vec<usize> { if item == 0 { cluster.clone() } else { vec![s + item - 1] } };
    let mut acc = Operator::zeros(total, g0.d());
    for p in all_set_partitions(&items) {
        let mut parts: Vec<(Operator, Vec<usize>)> = Vec::with_capacity(p.len());
        let mut merged = Vec::with_capacity(p.len());
        for block in p.blocks() {
            let sites: Vec<usize> = block.iter().flat_map(|&i| theta(i)).collect();
            let op = if block[0] == 0 {
                cluster_correlation(g0, &cluster, &sites[s..])?
            } else {
                g0.get(sites.len())?.clone()
            };
            parts.push((op, sites.clone()));
            merged.push(sites);
        }
        let refs: Vec<(&Operator, &[usize])> = parts.iter().map(|(o, l)| (o, l.as_slice())).collect();
        let x = place(&refs, total)?;
        acc = &acc + &prop.cumulant(GroupKind::Interacting, &merged, &x, Direction::State)?;
    }
    Ok(acc)
}

/// Reduced correlation operators in the requested mode.
pub fn reduced_correlations(system: &System, input: &OperatorSequence, mode: CorrelationMode) -> Result<SeriesSolution> {
    match mode {
        CorrelationMode::FromReduced => {
            let sequence = super::clusters::correlations_from_reduced(input)?;
            let tail = vec![0.0; sequence.max_n() + 1];
            Ok(SeriesSolution { sequence, tail })
        }
        CorrelationMode::ChaosSeries(t) => chaos_series(system, input, t),
        CorrelationMode::ViaCorrelations(t) => correlations_via_clusters(system, input, t),
    }
}

/// `G_s(t) = Σ_n (1/n!) Tr_{s+1..s+n} 𝔄_{s+n}(t, 1, …, s+n) ∏ G₁⁰`.
fn chaos_series(system: &System, g: &OperatorSequence, t: f64) -> Result<SeriesSolution> {
    g.expect_kind(SequenceKind::ReducedCorrelation)?;
    let g1 = g.get(1)?;
    guard(system, g1, t)?;
    let prop = system.propagator(t);
    let order = system.spec().series_order();
    let top = system.spec().n_max_particles();
    if top + order > system.max_particles() {
        return Err(Error::TruncationOverflow { needed: top + order, available: system.max_particles() });
    }
    let mut entries = vec![Operator::zeros(0, g.d())];
    let mut tail = vec![0.0];
    for s in 1..=top {
        let keep: Vec<usize> = (0..s).collect();
        let mut acc = Operator::zeros(s, g.d());
        let mut last = 0.0;
        for n in 0..=order {
            let x = crate::linalg::tensor_power(g1, s + n);
            let blocks: Vec<Vec<usize>> = singletons(0, s + n).collect();
            let y = prop.cumulant(GroupKind::Interacting, &blocks, &x, Direction::State)?;
            let term = partial_trace(&y, &keep)?.scale_real(1.0 / factorial(n));
            last = trace_norm(&term);
            acc = &acc + &term;
        }
        entries.push(acc);
        tail.push(last);
    }
    let sequence = OperatorSequence::from_parts(SequenceKind::ReducedCorrelation, g.d(), entries, Closure::Truncated);
    Ok(SeriesSolution { sequence, tail })
}

/// `G_s(t) = Σ_n (1/n!) Tr_{s+1..s+n} g_{s+n}(t)` with `g⁰` the cumulants of `F⁰`.
fn correlations_via_clusters(system: &System, f0: &OperatorSequence, t: f64) -> Result<SeriesSolution> {
    f0.expect_kind(SequenceKind::ReducedDensity)?;
    let plan = series_plan(system, f0)?;
    if f0.closure() == Closure::Truncated {
        guard(system, f0.get(1)?, t)?;
    }
    let g0 = super::clusters::density_to_clusters(&f0.clone().with_kind(SequenceKind::Density))?;
    let prop = system.propagator(t);
    let top = plan.iter().map(|&(s, o)| s + o).max().unwrap_or(0);
    let evolved: Vec<Operator> = (1..=top).map(|k| evolve_plain(&prop, &g0, k)).collect::<Result<_>>()?;
    let mut entries = vec![Operator::zeros(0, f0.d())];
    let mut tail = vec![0.0];
    for &(s, order) in &plan {
        let keep: Vec<usize> = (0..s).collect();
        let mut acc = Operator::zeros(s, f0.d());
        let mut last = 0.0;
        for n in 0..=order {
            let term = partial_trace(&evolved[s + n - 1], &keep)?.scale_real(1.0 / factorial(n));
            last = trace_norm(&term);
            acc = &acc + &term;
        }
        entries.push(acc);
        tail.push(if f0.closure() == Closure::Finite { 0.0 } else { last });
    }
    let sequence = OperatorSequence::from_parts(SequenceKind::ReducedCorrelation, f0.d(), entries, Closure::Truncated);
    Ok(SeriesSolution { sequence, tail })
}
