//! Exact finite-N references: cluster round trips, group cumulants, and the
//! state and observable series against direct unitary evolution.

use bbgky::combinatorics::all_set_partitions;
use bbgky::dynamics::{GroupKind, System};
use bbgky::hierarchy::*;
use bbgky::linalg::{c, swap, Direction, Matrix, Operator};
use bbgky::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Context;
use crate::report::SuiteRecord;

const SEED: u64 = 0x5EED_B6C7;
const SAMPLES: usize = 20;

pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Operator {
    let side = d.pow(n as u32);
    let m = Matrix::from_fn(side, side, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Operator::new(n, d, (&m + m.adjoint()) * c(0.5, 0.0)).expect("square matrix of matching size")
}

fn worst_entry_gap(a: &OperatorSequence, b: &OperatorSequence, from: usize) -> Result<f64> {
    let mut worst = 0.0_f64;
    for s in from..=a.max_n().min(b.max_n()) {
        worst = worst.max(a.get(s)?.distance(b.get(s)?));
    }
    Ok(worst)
}

pub(crate) fn cluster_roundtrip(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let d = ctx.d();
    let top = 4.min(ctx.system.max_particles());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut samples = Vec::with_capacity(SAMPLES + 1);
    for _ in 0..SAMPLES {
        let mut entries = vec![Operator::scalar(d, c(1.0, 0.0))];
        entries.extend((1..=top).map(|n| random_hermitian(&mut rng, n, d)));
        samples.push(OperatorSequence::new(SequenceKind::Density, d, entries, Closure::Finite)?);
    }
    samples.push(ctx.finite_density()?);
    let mut worst = 0.0_f64;
    for dseq in &samples {
        let back = clusters_to_density(&density_to_clusters(dseq)?)?;
        worst = worst.max(worst_entry_gap(dseq, &back, 0)?);
    }
    rec.measure("sequences", samples.len() as f64);
    rec.at_most("max_residual", worst, ctx.tol("cluster_roundtrip", 1e-12));
    Ok(())
}

/// Exact `D_n(t) = e^{−itH_n} D_n e^{itH_n}`.
fn evolve_exactly(system: &System, t: f64, dseq: &OperatorSequence) -> Result<OperatorSequence> {
    let mut entries = vec![dseq.get(0)?.clone()];
    for n in 1..=dseq.max_n() {
        let u = system.block_unitary(GroupKind::Interacting, n, t)?;
        entries.push(dseq.get(n)?.conjugate_by(&u));
    }
    OperatorSequence::new(SequenceKind::Density, dseq.d(), entries, Closure::Finite)
}

/// Cumulants of order ≥ 2 at `t = 0`, and the group on a union of blocks
/// rebuilt as the sum over partitions of products of cumulants.
fn cumulant_identities(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let n = 4.min(ctx.system.max_particles());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let x = random_hermitian(&mut rng, n, ctx.d());
    let sites: Vec<usize> = (0..n).collect();
    let at_zero = ctx.system.propagator(0.0);
    let mut vanishing = 0.0_f64;
    for p in all_set_partitions(&sites).into_iter().filter(|p| p.len() >= 2) {
        let y = at_zero.cumulant(GroupKind::Interacting, p.blocks(), &x, Direction::State)?;
        vanishing = vanishing.max(bbgky::linalg::trace_norm(&y));
    }
    rec.at_most("cumulant_vanishing_at_zero", vanishing, ctx.tol("cumulant_vanishing", 1e-12));

    let mut inversion = 0.0_f64;
    for &t in &ctx.scenario.t_grid {
        let prop = ctx.system.propagator(t);
        for blocks in all_set_partitions(&sites) {
            let blocks = blocks.into_blocks();
            let idx: Vec<usize> = (0..blocks.len()).collect();
            let mut sum = Operator::zeros(n, ctx.d());
            for p in all_set_partitions(&idx) {
                let mut y = x.clone();
                for z in p.blocks() {
                    let sub: Vec<Vec<usize>> = z.iter().map(|&i| blocks[i].clone()).collect();
                    y = prop.cumulant(GroupKind::Interacting, &sub, &y, Direction::State)?;
                }
                sum = &sum + &y;
            }
            let merged: Vec<Vec<usize>> = vec![blocks.concat()];
            let whole = prop.product_group(GroupKind::Interacting, &merged, &x, Direction::State)?;
            inversion = inversion.max(sum.distance(&whole));
        }
    }
    rec.at_most("mobius_inversion", inversion, ctx.tol("mobius_inversion", 1e-10));
    Ok(())
}

/// The three routes to `F_s(t)`: cumulants, iterated integrals, and traces
/// of evolved correlations (chaos data, where the last one applies).
fn route_equivalence(ctx: &Context, rec: &mut SuiteRecord, f0: &OperatorSequence) -> Result<()> {
    let tol = ctx.tol("route_equivalence", 1e-8);
    let mut iteration = 0.0_f64;
    for &t in &ctx.scenario.t_grid {
        let cum = bbgky_series_solution(&ctx.system, t, f0, SeriesRoute::Cumulant)?.sequence;
        let it = bbgky_iteration_solution(&ctx.system, t, f0, f0.max_n() - 1)?.sequence;
        iteration = iteration.max(worst_entry_gap(&cum, &it, 1)?);
    }
    rec.at_most("route_iteration_gap", iteration, tol);

    let order = ctx.system.spec().series_order().min(2);
    let system = System::new(ctx.system.spec().with_series_order(order));
    let f1 = ctx.f1();
    let chaos = OperatorSequence::factorized(SequenceKind::ReducedDensity, &f1, ctx.n_max() + order, Closure::Truncated)?;
    let t0 = convergence_radius(&system, &f1);
    let mut via = 0.0_f64;
    let mut used = 0;
    for &t in ctx.scenario.t_grid.iter().filter(|t| t.abs() < t0) {
        let a = bbgky_series_solution(&system, t, &chaos, SeriesRoute::Cumulant)?.sequence;
        let b = bbgky_series_solution(&system, t, &chaos, SeriesRoute::ViaCorrelations)?.sequence;
        via = via.max(worst_entry_gap(&a, &b, 1)?);
        used += 1;
    }
    rec.at_least("route_via_correlations_times", used as f64, 1.0);
    rec.at_most("route_via_correlations_gap", via, tol);
    Ok(())
}

pub(crate) fn equiv_state(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    cumulant_identities(ctx, rec)?;
    let dseq = ctx.finite_density()?;
    let f0 = reduce_density(&dseq)?;
    let mut worst = 0.0_f64;
    for &t in &ctx.scenario.t_grid {
        let exact = reduce_density(&evolve_exactly(&ctx.system, t, &dseq)?)?;
        let series = bbgky_series_solution(&ctx.system, t, &f0, SeriesRoute::Cumulant)?.sequence;
        worst = worst.max(worst_entry_gap(&exact, &series, 1)?);
    }
    rec.at_most("max_trace_distance", worst, ctx.tol("oracle_equiv_state", 1e-10));
    route_equivalence(ctx, rec, &f0)
}

/// Reduced observables: additive kinetic energy, the pair interaction, and a
/// seeded general sequence.
pub(crate) fn observables(ctx: &Context) -> Result<Vec<(&'static str, OperatorSequence, ObservableType)>> {
    let n = ctx.n_max();
    let d = ctx.d();
    let spec = ctx.system.spec();
    let kinetic = OperatorSequence::single(SequenceKind::ReducedObservable, spec.kinetic().clone(), n, Closure::Finite)?;
    let pair = OperatorSequence::single(SequenceKind::ReducedObservable, spec.interaction().clone(), n, Closure::Finite)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let b2 = random_hermitian(&mut rng, 2, d);
    let sw = swap(d);
    let b2 = (&b2 + &sw.compose(&b2)?.compose(&sw)?).scale_real(0.5);
    let mut entries = vec![Operator::scalar(d, c(0.3, 0.0)), random_hermitian(&mut rng, 1, d), b2];
    entries.extend((3..=n).map(|k| Operator::zeros(k, d)));
    entries.truncate(n + 1);
    let general = OperatorSequence::new(SequenceKind::ReducedObservable, d, entries, Closure::Finite)?;
    Ok(vec![
        ("additive", kinetic, ObservableType::Additive),
        ("pair", pair, ObservableType::KAry(2)),
        ("general", general, ObservableType::General),
    ])
}

pub(crate) fn equiv_observable(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let tol = ctx.tol("oracle_equiv_observable", 1e-10);
    for (name, b0, hint) in observables(ctx)? {
        let full = expand_observable(&b0)?;
        let mut worst = 0.0_f64;
        for &t in &ctx.scenario.t_grid {
            let mut entries = vec![full.get(0)?.clone()];
            for n in 1..=full.max_n() {
                let u = ctx.system.block_unitary(GroupKind::Interacting, n, t)?;
                entries.push(full.get(n)?.conjugate_by(&u.adjoint()));
            }
            let evolved = OperatorSequence::new(SequenceKind::Observable, ctx.d(), entries, Closure::Finite)?;
            let exact = reduce_observable(&evolved)?;
            let series = dual_bbgky_solution(&ctx.system, t, &b0, hint)?;
            worst = worst.max(worst_entry_gap(&exact, &series, 1)?);
        }
        rec.at_most(format!("{name}_max_trace_distance"), worst, tol);
    }
    Ok(())
}

pub(crate) fn duality(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let tol = ctx.tol("duality", 1e-10);
    let f0 = reduce_density(&ctx.finite_density()?)?;
    for (name, b0, hint) in observables(ctx)? {
        let mut worst = 0.0_f64;
        for &t in &ctx.scenario.t_grid {
            let bt = dual_bbgky_solution(&ctx.system, t, &b0, hint)?;
            let ft = bbgky_series_solution(&ctx.system, t, &f0, SeriesRoute::Cumulant)?.sequence;
            let gap = (expectation_complex(&bt, &f0)? - expectation_complex(&b0, &ft)?).norm();
            worst = worst.max(gap);
        }
        rec.at_most(format!("{name}_gap"), worst, tol);
    }
    Ok(())
}
