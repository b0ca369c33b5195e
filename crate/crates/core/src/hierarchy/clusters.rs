use crate::combinatorics::{all_set_partitions, cumulant_coefficient, subsets};
use crate::error::{Error, Result};
use crate::linalg::{c, embed, place, Operator};

use super::sequence::{Closure, OperatorSequence, SequenceKind};

/// `∏_{X∈blocks} op_{|X|}(X)` as an operator on `labels`, whose i-th factor is `labels[i]`.
pub(crate) fn block_product(
    blocks: &[Vec<usize>],
    labels: &[usize],
    d: usize,
    mut entry: impl FnMut(usize) -> Result<Operator>,
) -> Result<Operator> {
    if labels.is_empty() {
        return Ok(Operator::scalar(d, c(1.0, 0.0)));
    }
    let local = |x: &usize| labels.iter().position(|l| l == x).expect("block label outside the label list");
    let ops: Vec<(Operator, Vec<usize>)> =
        blocks.iter().map(|b| Ok((entry(b.len())?, b.iter().map(local).collect()))).collect::<Result<_>>()?;
    let refs: Vec<(&Operator, &[usize])> = ops.iter().map(|(o, s)| (o, s.as_slice())).collect();
    place(&refs, labels.len())
}

/// `Σ_P w(|P|) ∏_{X∈P} op_{|X|}(X)` over set partitions of `0..n`.
fn partition_sum(seq: &OperatorSequence, n: usize, weight: impl Fn(usize) -> f64) -> Result<Operator> {
    let d = seq.d();
    let labels: Vec<usize> = (0..n).collect();
    let mut acc = Operator::zeros(n, d);
    for p in all_set_partitions(&labels) {
        let w = weight(p.len());
        let term = block_product(p.blocks(), &labels, d, |k| seq.get(k).cloned())?;
        acc.add_assign_scaled(&term, w);
    }
    Ok(acc)
}

/// `D_n = Σ_P ∏ g_{|X_i|}(X_i)`; `D_0 = 1`.
pub fn clusters_to_density(g: &OperatorSequence) -> Result<OperatorSequence> {
    g.expect_kind(SequenceKind::Correlation)?;
    let mut entries = vec![Operator::scalar(g.d(), c(1.0, 0.0))];
    for n in 1..=g.max_n() {
        entries.push(partition_sum(g, n, |_| 1.0)?);
    }
    Ok(OperatorSequence::from_parts(SequenceKind::Density, g.d(), entries, Closure::Truncated))
}

/// `g_n = Σ_P (−1)^{|P|−1}(|P|−1)! ∏ D_{|X_i|}(X_i)`.
pub fn density_to_clusters(dseq: &OperatorSequence) -> Result<OperatorSequence> {
    dseq.expect_kind(SequenceKind::Density)?;
    cumulants(dseq, SequenceKind::Correlation)
}

fn cumulants(seq: &OperatorSequence, kind: SequenceKind) -> Result<OperatorSequence> {
    let mut entries = vec![Operator::zeros(0, seq.d())];
    for n in 1..=seq.max_n() {
        entries.push(partition_sum(seq, n, |p| cumulant_coefficient(p).unwrap() as f64)?);
    }
    Ok(OperatorSequence::from_parts(kind, seq.d(), entries, Closure::Truncated))
}

/// Reduced correlations `G_s` as cumulants of the reduced densities `F`.
///
/// For a finite sequence the result carries one extra entry, computed with
/// the next density entry set to zero.
pub fn correlations_from_reduced(f: &OperatorSequence) -> Result<OperatorSequence> {
    f.expect_kind(SequenceKind::ReducedDensity)?;
    let padded = if f.closure() == Closure::Finite {
        let mut e = f.entries().to_vec();
        e.push(Operator::zeros(f.max_n() + 1, f.d()));
        OperatorSequence::from_parts(f.kind(), f.d(), e, Closure::Finite)
    } else {
        f.clone()
    };
    cumulants(&padded, SequenceKind::ReducedCorrelation)
}

/// `F_s = (I,D)^{−1} Σ_n (1/n!) Tr_{s+1..s+n} D_{s+n}`.
pub fn reduce_density(dseq: &OperatorSequence) -> Result<OperatorSequence> {
    dseq.expect_kind(SequenceKind::Density)?;
    if dseq.closure() != Closure::Finite {
        return Err(Error::InvalidArgument("reduction needs a finite density sequence".into()));
    }
    let norm = dseq.normalization();
    if norm.norm() < 1e-300 {
        return Err(Error::ZeroNormalization);
    }
    let inv = c(1.0, 0.0) / norm;
    let big_n = dseq.max_n();
    let mut entries = Vec::with_capacity(big_n + 1);
    for s in 0..=big_n {
        let keep: Vec<usize> = (0..s).collect();
        let mut acc = Operator::zeros(s, dseq.d());
        let mut fact = 1.0;
        for n in 0..=big_n - s {
            if n > 0 {
                fact *= n as f64;
            }
            let tr = crate::linalg::partial_trace(dseq.get(s + n)?, &keep)?;
            acc.add_assign_scaled(&tr, 1.0 / fact);
        }
        entries.push(acc.scale(inv));
    }
    Ok(OperatorSequence::from_parts(SequenceKind::ReducedDensity, dseq.d(), entries, Closure::Finite))
}

/// `B_s = Σ_{J⊆S} (−1)^{|J|} A_{s−|J|}(S∖J)`.
pub fn reduce_observable(a: &OperatorSequence) -> Result<OperatorSequence> {
    a.expect_kind(SequenceKind::Observable)?;
    let mut entries = Vec::with_capacity(a.max_n() + 1);
    for s in 0..=a.max_n() {
        let all: Vec<usize> = (0..s).collect();
        let mut acc = Operator::zeros(s, a.d());
        for kept in subsets(&all) {
            let sign = if (s - kept.len()) % 2 == 0 { 1.0 } else { -1.0 };
            let term = embed(a.get(kept.len())?, &kept, s)?;
            acc.add_assign_scaled(&term, sign);
        }
        entries.push(acc);
    }
    Ok(OperatorSequence::from_parts(SequenceKind::ReducedObservable, a.d(), entries, a.closure()))
}

/// Inverse of [`reduce_observable`]: `A_n = Σ_{S'⊆{1..n}} B_{|S'|}(S')`.
pub fn expand_observable(b: &OperatorSequence) -> Result<OperatorSequence> {
    b.expect_kind(SequenceKind::ReducedObservable)?;
    let mut entries = Vec::with_capacity(b.max_n() + 1);
    for n in 0..=b.max_n() {
        let all: Vec<usize> = (0..n).collect();
        let mut acc = Operator::zeros(n, b.d());
        for kept in subsets(&all) {
            acc = &acc + &embed(b.get(kept.len())?, &kept, n)?;
        }
        entries.push(acc);
    }
    Ok(OperatorSequence::from_parts(SequenceKind::Observable, b.d(), entries, b.closure()))
}

/// Correlation of the cluster `cluster` (treated as one particle) with the
/// particles `singles`: the sum over partitions of all labels whose every
/// block meets the cluster. Returned on `cluster ++ singles` in that order.
pub(crate) fn cluster_correlation(g: &OperatorSequence, cluster: &[usize], singles: &[usize]) -> Result<Operator> {
    let labels: Vec<usize> = cluster.iter().chain(singles).cloned().collect();
    let mut acc = Operator::zeros(labels.len(), g.d());
    for p in all_set_partitions(&labels) {
        if p.blocks().iter().all(|b| b.iter().any(|x| cluster.contains(x))) {
            let term = block_product(p.blocks(), &labels, g.d(), |k| g.get(k).cloned())?;
            acc = &acc + &term;
        }
    }
    Ok(acc)
}
