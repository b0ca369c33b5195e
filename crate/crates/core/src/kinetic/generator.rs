use crate::combinatorics::{factorial, injections, ordered_dissections};
use crate::dynamics::{GroupKind, Propagator, System};
use crate::error::{Error, Result};
use crate::hierarchy::guard;
use crate::linalg::{partial_trace, tensor_power, trace_norm, Direction, Operator};

fn scattering_cumulant(prop: &Propagator<'_>, blocks: &[Vec<usize>], x: &Operator) -> Result<Operator> {
    prop.cumulant(GroupKind::Scattering, blocks, x, Direction::State)
}

/// One dissection step: particles `zone` are absorbed into the first `avail`
/// particles through scattering cumulants.
fn absorb(prop: &Propagator<'_>, zone: &[usize], avail: usize, y: &Operator) -> Result<Operator> {
    let mut acc = Operator::zeros(y.n_particles(), y.d());
    for dissection in ordered_dissections(zone, avail)? {
        let segments = dissection.segments();
        let weight = 1.0 / factorial(segments.len());
        for targets in injections(segments.len(), avail) {
            let mut term = y.clone();
            for (&i, seg) in targets.iter().zip(segments) {
                let blocks: Vec<Vec<usize>> = std::iter::once(vec![i]).chain(seg.iter().map(|&x| vec![x])).collect();
                term = scattering_cumulant(prop, &blocks, &term)?.scale_real(1.0 / factorial(seg.len()));
            }
            acc.add_assign_scaled(&term, weight);
        }
    }
    Ok(acc)
}

/// `𝔙_{1+n}(t, {1..s}, s+1, …, s+n)` applied to `x` on `s + n` particles.
///
/// Compositions of absorbed particles are walked depth first so that shared
/// prefixes are evaluated once.
pub fn apply_kinetic_generator(prop: &Propagator<'_>, s: usize, n: usize, x: &Operator) -> Result<Operator> {
    if s == 0 {
        return Err(Error::InvalidArgument("kinetic generator needs at least one particle".into()));
    }
    if x.n_particles() != s + n {
        return Err(Error::ParticleMismatch { expected: s + n, found: x.n_particles() });
    }
    let mut acc = Operator::zeros(s + n, x.d());
    walk(prop, s, n, 0, 0, x, &mut acc)?;
    Ok(acc.scale_real(factorial(n)))
}

fn walk(prop: &Propagator<'_>, s: usize, n: usize, depth: usize, used: usize, y: &Operator, acc: &mut Operator) -> Result<()> {
    let rest = n - used;
    let blocks: Vec<Vec<usize>> = std::iter::once((0..s).collect()).chain((s..s + rest).map(|j| vec![j])).collect();
    let sign = if depth.is_multiple_of(2) { 1.0 } else { -1.0 };
    acc.add_assign_scaled(&scattering_cumulant(prop, &blocks, y)?, sign / factorial(rest));
    let total = s + n;
    for step in 1..=rest {
        let avail = total - used - step;
        let zone: Vec<usize> = (avail..total - used).collect();
        let next = absorb(prop, &zone, avail, y)?;
        walk(prop, s, n, depth + 1, used + step, &next, acc)?;
    }
    Ok(())
}

/// `F_s(t | F₁) = Σ_{n≤order} (1/n!) Tr_{s+1..s+n} 𝔙_{1+n} F₁^{⊗(s+n)}`,
/// with the trace norm of the last term.
pub fn state_functional(system: &System, t: f64, s: usize, f1: &Operator, order: usize) -> Result<(Operator, f64)> {
    if f1.n_particles() != 1 {
        return Err(Error::ParticleMismatch { expected: 1, found: f1.n_particles() });
    }
    guard(system, f1, t)?;
    if s + order > system.max_particles() {
        return Err(Error::ParticlesOutOfRange { n: s + order, max: system.max_particles() });
    }
    let prop = system.propagator(t);
    let keep: Vec<usize> = (0..s).collect();
    let mut acc = Operator::zeros(s, f1.d());
    let mut last = 0.0;
    for n in 0..=order {
        let y = apply_kinetic_generator(&prop, s, n, &tensor_power(f1, s + n))?;
        let term = partial_trace(&y, &keep)?.scale_real(1.0 / factorial(n));
        last = trace_norm(&term);
        acc = &acc + &term;
    }
    Ok((acc, last))
}
