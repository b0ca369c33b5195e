use std::cell::RefCell;
use std::collections::HashMap;

use crate::dynamics::{GroupKind, System};
use crate::error::{Error, Result};
use crate::hierarchy::{
    check_support, correlations_from_reduced, cumulant_term, nested_term, refine, Closure, ObservableType,
    OperatorSequence, SequenceKind,
};
use crate::linalg::{c, embed, tensor_power, Direction, Operator};

use super::generator::state_functional;
use super::series::{one_particle_series, SeriesMode};
use super::sweep::{fit_order, SweepResult};
use super::KineticState;

/// The same model with unit coupling, used by every limit-scale evaluation.
pub fn limit_system(system: &System) -> Result<System> {
    Ok(System::new(system.spec().with_epsilon(1.0)?))
}

fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidArgument("an ε sweep needs at least three values".into()));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("ε values must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// For every order `n`, `‖ε^{−n} (1/n!) Tr 𝔄_{1+n}(t) f^{⊗(s+n)} − limit term‖₁`
/// over `eps_list`, where the limit term nests free groups and unit collisions.
pub fn meanfield_limit_check(
    system: &System,
    t: f64,
    s: usize,
    orders: &[usize],
    eps_list: &[f64],
    f: &Operator,
) -> Result<Vec<SweepResult>> {
    check_eps_list(eps_list)?;
    let limit = limit_system(system)?;
    let mut out = Vec::with_capacity(orders.len());
    for &n in orders {
        let data = tensor_power(f, s + n);
        let target = nested_term(&limit, GroupKind::Free, 1.0, t, s, &data)?;
        let mut distances = Vec::with_capacity(eps_list.len());
        for &eps in eps_list {
            let sys = System::new(system.spec().with_epsilon(eps)?);
            let term = cumulant_term(&sys.propagator(t), GroupKind::Interacting, s, n, &data)?;
            distances.push(term.scale_real(eps.powi(-(n as i32))).distance(&target));
        }
        out.push(fit_order(s, n, eps_list, distances));
    }
    Ok(out)
}

/// `‖ε^s F_s(t | F₁(t)) − ∏ f₁(t)‖₁` over `eps_list` for `s = 1..=s_max`,
/// starting from `F₁⁰ = f₁⁰/ε` and comparing with the truncation-matched
/// limit series. With a correlation kernel only `s = 1` is compared.
pub fn chaos_check(system: &System, t: f64, state: &KineticState, s_max: usize, eps_list: &[f64]) -> Result<Vec<SweepResult>> {
    check_eps_list(eps_list)?;
    if s_max == 0 {
        return Err(Error::InvalidArgument("s_max must be positive".into()));
    }
    if state.kernel.is_some() && s_max > 1 {
        return Err(Error::InvalidArgument("correlated data is compared on the one-particle level only".into()));
    }
    let (f_lim, _) = one_particle_series(system, t, state, SeriesMode::Limit)?;
    let mut distances = vec![Vec::with_capacity(eps_list.len()); s_max];
    for &eps in eps_list {
        let sys = System::new(system.spec().with_epsilon(eps)?);
        let scaled = KineticState { f1: state.f1.scale_real(1.0 / eps), ..state.clone() };
        let (f1_t, _) = one_particle_series(&sys, t, &scaled, SeriesMode::FullCumulant)?;
        distances[0].push(f1_t.scale_real(eps).distance(&f_lim));
        for s in 2..=s_max {
            let (fs, _) = state_functional(&sys, t, s, &f1_t, state.order)?;
            distances[s - 1].push(fs.scale_real(eps.powi(s as i32)).distance(&tensor_power(&f_lim, s)));
        }
    }
    Ok(distances.into_iter().enumerate().map(|(i, d)| fit_order(i + 1, state.order, eps_list, d)).collect())
}

/// `f_k(t) = (𝒢*_k(t) g_k⁰) ∏ f₁(t)` for `k ≤ k_max`, with free groups and
/// `g₁⁰ = I`.
pub fn dchaos_sequence(system: &System, t: f64, state: &KineticState, f1_t: &Operator, k_max: usize) -> Result<OperatorSequence> {
    let limit = limit_system(system)?;
    let mut entries = vec![Operator::scalar(f1_t.d(), c(1.0, 0.0))];
    for k in 1..=k_max {
        let product = tensor_power(f1_t, k);
        let entry = match (&state.kernel, k) {
            (None, _) | (_, 1) => product,
            (Some(g), _) => {
                let g0 = g.get(k - 2).ok_or(Error::MissingEntry { n: k })?;
                g0.conjugate_by(&limit.block_unitary(GroupKind::Free, k, t)?).compose(&product)?
            }
        };
        entries.push(entry);
    }
    Ok(OperatorSequence::from_parts(SequenceKind::ReducedDensity, f1_t.d(), entries, Closure::Truncated))
}

/// Correlations carried by the [`dchaos_sequence`] limit states.
pub fn correlation_propagation(dchaos: &OperatorSequence) -> Result<OperatorSequence> {
    correlations_from_reduced(dchaos)
}

struct DualLimit<'a> {
    limit: &'a System,
    b0: &'a OperatorSequence,
    s: usize,
    /// Largest set of removed particles that still carries a nonzero entry.
    deepest: usize,
    nodes: &'a (Vec<f64>, Vec<f64>),
    panels: usize,
    /// `R(J, τ)` depends only on the set `J`, so different removal orders
    /// reaching it at the same node share one evaluation.
    memo: RefCell<HashMap<(Vec<usize>, u64), Operator>>,
}

impl DualLimit<'_> {
    fn free(&self, x: &Operator, tau: f64) -> Result<Operator> {
        let u = self.limit.block_unitary(GroupKind::Free, self.s, tau)?;
        Ok(x.conjugate_by(&u.adjoint()))
    }

    /// `R(J, τ)` for removed particles `removed` (sorted).
    fn value(&self, removed: &[usize], tau: f64) -> Result<Operator> {
        let key = (removed.to_vec(), tau.to_bits());
        if let Some(hit) = self.memo.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let value = self.compute(removed, tau)?;
        self.memo.borrow_mut().insert(key, value.clone());
        Ok(value)
    }

    fn compute(&self, removed: &[usize], tau: f64) -> Result<Operator> {
        let kept: Vec<usize> = (0..self.s).filter(|j| !removed.contains(j)).collect();
        let own = embed(&self.b0.entry_or_zero(kept.len())?, &kept, self.s)?;
        let mut acc = self.free(&own, tau)?;
        if removed.len() >= self.deepest || kept.len() < 2 {
            return Ok(acc);
        }
        let (xs, ws) = self.nodes;
        let h = tau / self.panels as f64;
        for p in 0..self.panels {
            for (x, w) in xs.iter().zip(ws) {
                let sigma = p as f64 * h + 0.5 * h * (x + 1.0);
                let mut inner = Operator::zeros(self.s, own.d());
                for &j in &kept {
                    let mut next: Vec<usize> = removed.to_vec();
                    next.push(j);
                    next.sort_unstable();
                    let r = self.value(&next, sigma)?;
                    for &i in kept.iter().filter(|&&i| i != j) {
                        inner = &inner + &self.limit.interaction_term(&r, i, j, Direction::Observable)?;
                    }
                }
                acc.add_assign_scaled(&self.free(&inner, tau - sigma)?, 0.5 * h * w);
            }
        }
        Ok(acc)
    }
}

/// Limit observables `b_s(t)`: free evolutions of `b⁰_{s−|J|}` interleaved
/// with unit-strength interaction steps that each remove one particle.
pub fn limit_observables(system: &System, t: f64, b0: &OperatorSequence, hint: ObservableType) -> Result<OperatorSequence> {
    b0.expect_kind(SequenceKind::ReducedObservable)?;
    check_support(b0, hint)?;
    let limit = limit_system(system)?;
    let nodes = crate::hierarchy::gauss_legendre(crate::hierarchy::GL_POINTS);
    let mut entries = vec![b0.get(0)?.clone()];
    for s in 1..=b0.max_n() {
        let deepest = match hint.support() {
            Some(k) if k <= s => s - k,
            Some(_) => {
                entries.push(Operator::zeros(s, b0.d()));
                continue;
            }
            None => s - 1,
        };
        let at = |panels| DualLimit { limit: &limit, b0, s, deepest, nodes: &nodes, panels, memo: RefCell::default() }.value(&[], t);
        entries.push(if deepest == 0 { at(1)? } else { refine(at)? });
    }
    Ok(OperatorSequence::from_parts(SequenceKind::ReducedObservable, b0.d(), entries, b0.closure()))
}
