use crate::combinatorics::factorial;
use crate::error::{Error, Result};
use crate::linalg::{c, embed, tensor, Operator, C64};

use super::sequence::{OperatorSequence, SequenceKind};

/// `Σ_s (1/s!) Tr B_s F_s` over the entries both sequences provide.
pub fn expectation_complex(b: &OperatorSequence, f: &OperatorSequence) -> Result<C64> {
    b.expect_kind(SequenceKind::ReducedObservable)?;
    if !matches!(f.kind(), SequenceKind::ReducedDensity) {
        f.expect_kind(SequenceKind::ReducedDensity)?;
    }
    if b.d() != f.d() {
        return Err(Error::DimensionMismatch { left: b.d(), right: f.d() });
    }
    let top = b.max_n().min(f.max_n());
    let mut acc = c(0.0, 0.0);
    for s in 0..=top {
        acc += b.get(s)?.compose(f.get(s)?)?.trace() / factorial(s);
    }
    Ok(acc)
}

/// Real part of [`expectation_complex`].
pub fn expectation(b: &OperatorSequence, f: &OperatorSequence) -> Result<f64> {
    Ok(expectation_complex(b, f)?.re)
}

/// `(I,D)^{−1} Σ_n (1/n!) Tr A_n D_n`.
pub fn mean_value(a: &OperatorSequence, dseq: &OperatorSequence) -> Result<f64> {
    a.expect_kind(SequenceKind::Observable)?;
    dseq.expect_kind(SequenceKind::Density)?;
    let norm = dseq.normalization();
    if norm.norm() < 1e-300 {
        return Err(Error::ZeroNormalization);
    }
    let top = a.max_n().min(dseq.max_n());
    let mut acc = c(0.0, 0.0);
    for n in 0..=top {
        acc += a.get(n)?.compose(dseq.get(n)?)?.trace() / factorial(n);
    }
    Ok((acc / norm).re)
}

/// `Tr₁(a² − ⟨A⟩²)G₁ + Tr₁,₂ a(1)a(2) G₂` with `⟨A⟩ = Tr₁ a G₁`.
pub fn dispersion(a1: &Operator, g: &OperatorSequence) -> Result<f64> {
    if a1.n_particles() != 1 {
        return Err(Error::ParticleMismatch { expected: 1, found: a1.n_particles() });
    }
    a1.check_hermitian()?;
    g.expect_kind(SequenceKind::ReducedCorrelation)?;
    let g1 = g.get(1)?;
    let g2 = g.get(2)?;
    let mean = a1.compose(g1)?.trace().re;
    let sq = a1.compose(a1)?;
    let shifted = &sq - &Operator::identity(1, a1.d()).scale_real(mean * mean);
    let pair = tensor(a1, a1)?;
    Ok(shifted.compose(g1)?.trace().re + pair.compose(g2)?.trace().re)
}

/// The additive observable `Σ_j a(j)` on `n` particles.
pub fn additive_observable(a1: &Operator, n: usize) -> Result<Operator> {
    let mut acc = Operator::zeros(n, a1.d());
    for j in 0..n {
        acc = &acc + &embed(a1, &[j], n)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::Closure;

    fn g_seq(g1: Operator, g2: Operator) -> OperatorSequence {
        OperatorSequence::new(SequenceKind::ReducedCorrelation, 2, vec![Operator::zeros(0, 2), g1, g2], Closure::Truncated)
            .unwrap()
    }

    #[test]
    fn dispersion_examples() {
        let proj = Operator::from_real_diagonal(2, &[1.0, 0.0]).unwrap();
        let v = dispersion(&Operator::identity(1, 2), &g_seq(proj, Operator::zeros(2, 2))).unwrap();
        assert!(v.abs() < 1e-15);
        let a = Operator::from_real_diagonal(2, &[1.0, -1.0]).unwrap();
        let g1 = Operator::from_real_diagonal(2, &[0.75, 0.25]).unwrap();
        let v = dispersion(&a, &g_seq(g1, Operator::zeros(2, 2))).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
    }

    #[test]
    fn expectation_trivial_cases() {
        let f1 = Operator::from_real_diagonal(2, &[0.6, 0.3]).unwrap();
        let f = OperatorSequence::factorized(SequenceKind::ReducedDensity, &f1, 2, Closure::Truncated).unwrap();
        let b = OperatorSequence::single(SequenceKind::ReducedObservable, Operator::identity(1, 2), 2, Closure::Finite).unwrap();
        assert!((expectation(&b, &f).unwrap() - 0.9).abs() < 1e-15);
        let b0 = OperatorSequence::single(SequenceKind::ReducedObservable, Operator::scalar(2, c(2.5, 0.0)), 2, Closure::Finite)
            .unwrap();
        assert!((expectation(&b0, &f).unwrap() - 2.5).abs() < 1e-15);
    }
}
