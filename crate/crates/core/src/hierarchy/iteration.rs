use crate::dynamics::{GroupKind, System};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, trace_norm, Direction, Operator};

use super::sequence::{Closure, OperatorSequence, SequenceKind};
use super::series::{guard, SeriesSolution};

/// Nodes per Gauss–Legendre panel.
pub(crate) const GL_POINTS: usize = 10;
/// Successive panel doublings must agree to this trace-norm distance.
pub const QUADRATURE_TOL: f64 = 1e-9;
const MAX_PANELS: usize = 64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

struct Nested<'a> {
    system: &'a System,
    kind: GroupKind,
    coupling: f64,
    nodes: (Vec<f64>, Vec<f64>),
    panels: usize,
}

impl Nested<'_> {
    fn evolve(&self, x: &Operator, tau: f64) -> Result<Operator> {
        let u = self.system.block_unitary(self.kind, x.n_particles(), tau)?;
        Ok(x.conjugate_by(&u))
    }

    /// `c Tr_{k+1} Σ_{i≤k} 𝒩*_int(i, k+1) Y` for `Y` on `k+1` particles.
    fn collision(&self, y: &Operator) -> Result<Operator> {
        let k = y.n_particles() - 1;
        let mut acc = Operator::zeros(k + 1, y.d());
        for i in 0..k {
            acc = &acc + &self.system.interaction_term(y, i, k, Direction::State)?;
        }
        let keep: Vec<usize> = (0..k).collect();
        Ok(partial_trace(&acc, &keep)?.scale_real(self.coupling))
    }

    /// `V_k(τ)`: the `(top−k)`-fold time-ordered integral ending in `𝒢*_{top}(·) f`.
    fn level(&self, k: usize, top: usize, tau: f64, f: &Operator) -> Result<Operator> {
        if k == top {
            return self.evolve(f, tau);
        }
        let (xs, ws) = &self.nodes;
        let h = tau / self.panels as f64;
        let mut acc = Operator::zeros(k, f.d());
        for p in 0..self.panels {
            let a = p as f64 * h;
            for (x, w) in xs.iter().zip(ws) {
                let sigma = a + 0.5 * h * (x + 1.0);
                let inner = self.collision(&self.level(k + 1, top, sigma, f)?)?;
                let term = self.evolve(&inner, tau - sigma)?;
                acc.add_assign_scaled(&term, 0.5 * h * w);
            }
        }
        Ok(acc)
    }
}

/// The `n`-th iteration term for `F_s`, refined by panel doubling.
pub fn iteration_term(system: &System, t: f64, s: usize, f: &Operator) -> Result<Operator> {
    nested_term(system, GroupKind::Interacting, system.epsilon(), t, s, f)
}

/// Time-ordered integral over `f.n_particles() − s` collision steps with
/// groups of `kind` between them and coupling `coupling` in each step.
pub(crate) fn nested_term(system: &System, kind: GroupKind, coupling: f64, t: f64, s: usize, f: &Operator) -> Result<Operator> {
    let top = f.n_particles();
    if top < s {
        return Err(Error::InvalidArgument("initial entry has fewer particles than requested".into()));
    }
    let nodes = gauss_legendre(GL_POINTS);
    let at = |panels| Nested { system, kind, coupling, nodes: nodes.clone(), panels }.level(s, top, t, f);
    if top == s {
        return at(1);
    }
    refine(at)
}

/// Doubles the panel count until successive values agree to [`QUADRATURE_TOL`].
pub(crate) fn refine(mut at: impl FnMut(usize) -> Result<Operator>) -> Result<Operator> {
    let mut panels = 1;
    let mut prev = at(panels)?;
    let mut change = f64::INFINITY;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = at(panels)?;
        change = trace_norm(&(&next - &prev));
        prev = next;
        if change < QUADRATURE_TOL {
            return Ok(prev);
        }
    }
    Err(Error::Quadrature { tol: QUADRATURE_TOL, change })
}

/// Partial sums through `order` of the time-ordered iteration series.
pub fn bbgky_iteration_solution(system: &System, t: f64, f0: &OperatorSequence, order: usize) -> Result<SeriesSolution> {
    f0.expect_kind(SequenceKind::ReducedDensity)?;
    let max = f0.max_n();
    let top_s = match f0.closure() {
        Closure::Finite => max,
        Closure::Truncated => {
            guard(system, f0.get(1)?, t)?;
            if max < 1 + order {
                return Err(Error::TruncationOverflow { needed: 1 + order, available: max });
            }
            system.spec().n_max_particles().min(max - order)
        }
    };
    let mut entries = vec![f0.get(0)?.clone()];
    let mut tail = vec![0.0];
    for s in 1..=top_s {
        let mut acc = Operator::zeros(s, f0.d());
        let mut last = 0.0;
        for n in 0..=order {
            if s + n > max {
                break;
            }
            let term = iteration_term(system, t, s, f0.get(s + n)?)?;
            last = trace_norm(&term);
            acc = &acc + &term;
        }
        entries.push(acc);
        tail.push(last);
    }
    let closure = if f0.closure() == Closure::Finite && order + 1 >= max { Closure::Finite } else { Closure::Truncated };
    let sequence = OperatorSequence::from_parts(SequenceKind::ReducedDensity, f0.d(), entries, closure);
    Ok(SeriesSolution { sequence, tail })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in [1, 2, 5, 10] {
            let (x, w) = gauss_legendre(m);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for p in 0..2 * m {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "m={m} p={p}");
            }
        }
    }
}
