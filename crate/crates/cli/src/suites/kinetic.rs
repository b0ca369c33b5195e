//! Kinetic-scale checks: ε sweeps, the generalized kinetic equation against
//! its series, and the Vlasov flows with and without initial correlations.

use bbgky::combinatorics::factorial;
use bbgky::hierarchy::{convergence_radius, expectation, Closure, ObservableType, OperatorSequence, SequenceKind};
use bbgky::kinetic::*;
use bbgky::linalg::{herm_eig, operator_norm, tensor_power, Operator};
use bbgky::Result;

use super::Context;
use crate::report::{Cell, PlotKind, SuiteRecord, Table};

const MEANFIELD_T: f64 = 0.4;
const CHAOS_T: f64 = 0.3;
const GQKE_STEP: f64 = 0.005;
const REFERENCE_ORDER: usize = 6;
const LIMIT_LEVELS: usize = 4;
const SERIES_TIMES: [f64; 3] = [0.1, 0.2, 0.4];

fn sweep_table(file: String, r: &SweepResult) -> Table {
    let mut t = Table::new(file, PlotKind::Sweep, &["s", "n", "epsilon", "distance", "fitted_order"]);
    for (e, dist) in r.eps.iter().zip(&r.distances) {
        t.rows.push(vec![Cell::Int(r.s), Cell::Int(r.n), Cell::Float(*e), Cell::Float(*dist), Cell::Float(r.fitted_order)]);
    }
    t
}

fn record_sweep(rec: &mut SuiteRecord, key: &str, r: &SweepResult) {
    let decreasing = r.distances.windows(2).all(|w| w[1] < w[0]);
    rec.at_least(format!("{key}_decreasing"), f64::from(u8::from(decreasing)), 1.0);
    rec.measure(format!("{key}_r_squared"), r.r_squared);
    rec.measure(format!("{key}_fit_residual"), r.residual);
}

pub(crate) fn meanfield(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let eps = &ctx.scenario.eps_list;
    let f = ctx.f1();
    let band = ctx.tol("meanfield_order_band", 0.2);
    let zeroth = meanfield_limit_check(&ctx.system, MEANFIELD_T, 2, &[0], eps, &f)?;
    let rest = meanfield_limit_check(&ctx.system, MEANFIELD_T, 1, &[1, 2], eps, &f)?;
    for r in zeroth.iter().chain(&rest) {
        let key = format!("n{}", r.n);
        record_sweep(rec, &key, r);
        if r.n == 0 {
            rec.measure(format!("{key}_fitted_order"), r.fitted_order);
        } else {
            rec.near(format!("{key}_fitted_order"), r.fitted_order, 1.0, band);
        }
        rec.tables.push(sweep_table(format!("meanfield_n{}.csv", r.n), r));
    }
    Ok(())
}

/// `(1/k!) Tr a^{⊗k} f₁(t)^{⊗k}` against the evolved limit observable on chaos
/// data. The expectation is a series over particle numbers, kept through
/// [`LIMIT_LEVELS`] particles and at least two interaction levels.
fn limit_expectations(ctx: &Context, rec: &mut SuiteRecord, f1_t: &Operator) -> Result<()> {
    let f = ctx.f1();
    let a = ctx.system.spec().kinetic().clone();
    for k in 1..=2 {
        let top = (k + 2).max(LIMIT_LEVELS).min(ctx.system.max_particles());
        let bk = tensor_power(&a, k);
        let want = bk.compose(&tensor_power(f1_t, k))?.trace().re / factorial(k);
        let mut entries: Vec<Operator> = (0..=top).map(|n| Operator::zeros(n, ctx.d())).collect();
        entries[k] = bk;
        let b0 = OperatorSequence::new(SequenceKind::ReducedObservable, ctx.d(), entries, Closure::Finite)?;
        let bt = limit_observables(&ctx.system, CHAOS_T, &b0, ObservableType::KAry(k))?;
        let chaos = OperatorSequence::factorized(SequenceKind::ReducedDensity, &f, top, Closure::Truncated)?;
        let tail = bt.get(top)?.compose(chaos.get(top)?)?.trace().re.abs() / factorial(top);
        rec.measure(format!("limit_observable_k{k}_last_level"), tail);
        rec.at_most(format!("limit_observable_k{k}_gap"), (expectation(&bt, &chaos)? - want).abs(), ctx.tol("limit_observables", 1e-6));
    }
    Ok(())
}

pub(crate) fn chaos(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let eps = &ctx.scenario.eps_list;
    let min_order = ctx.tol("chaos_min_order", 0.8);
    let state = KineticState::new(ctx.f1(), 2, None)?;
    for r in chaos_check(&ctx.system, CHAOS_T, &state, 2, eps)? {
        let key = format!("s{}", r.s);
        record_sweep(rec, &key, &r);
        rec.at_least(format!("{key}_fitted_order"), r.fitted_order, min_order);
        rec.tables.push(sweep_table(format!("chaos_s{}.csv", r.s), &r));
    }
    if let Some(g) = ctx.scenario.initial_state.kernel() {
        let state = KineticState::new(ctx.f1(), 1, Some(g.to_vec()))?;
        let r = &chaos_check(&ctx.system, CHAOS_T, &state, 1, eps)?[0];
        record_sweep(rec, "correlated_s1", r);
        rec.at_least("correlated_s1_fitted_order", r.fitted_order, min_order);
        rec.tables.push(sweep_table("chaos_correlated_s1.csv".into(), r));
    }
    let plain = KineticState::new(ctx.f1(), 0, None)?;
    let traj = vlasov_integrate(&ctx.system, &[0.0, CHAOS_T], &plain, VlasovKind::Plain, Default::default())?;
    limit_expectations(ctx, rec, &traj.states[1])
}

pub(crate) fn gqke(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let f = ctx.f1();
    let scale = convergence_radius(&ctx.system, &f).min(1.0);
    let times: Vec<f64> = [0.2, 0.4, 0.8].iter().map(|t| t * scale).collect();
    let grid: Vec<f64> = std::iter::once(0.0).chain(times.iter().copied()).collect();
    let reference_order = REFERENCE_ORDER.min(ctx.system.max_particles() - 1);
    let reference = KineticState::new(f.clone(), reference_order, None)?;
    let references = times
        .iter()
        .map(|&t| one_particle_series(&ctx.system, t, &reference, SeriesMode::FullCumulant).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let options = IntegratorOptions { max_step: Some(GQKE_STEP), ..Default::default() };
    let min_r2 = ctx.tol("gqke_min_r_squared", 0.98);
    for n_max in [2, 3] {
        let state = KineticState::new(f.clone(), n_max, None)?;
        let traj = gqke_integrate(&ctx.system, &grid, &state, options)?;
        let gaps: Vec<f64> = traj.states[1..].iter().zip(&references).map(|(a, b)| a.distance(b)).collect();
        let (order, _, r2) = log_log_fit(&times, &gaps);
        let ratio = gaps.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
        let key = format!("n_max{n_max}");
        rec.measure(format!("{key}_fitted_order"), order);
        rec.at_least(format!("{key}_min_halving_ratio"), ratio, 2f64.powi(n_max as i32));
        rec.at_least(format!("{key}_r_squared"), r2, min_r2);
        let mut table = Table::new(format!("gqke_n{n_max}.csv"), PlotKind::Trajectory, &["t", "trace", "gap"]);
        for ((t, state), gap) in times.iter().zip(&traj.states[1..]).zip(&gaps) {
            table.rows.push(vec![Cell::Float(*t), Cell::Float(state.trace().re), Cell::Float(*gap)]);
        }
        rec.tables.push(table);
    }
    rec.measure("reference_order", reference_order as f64);
    Ok(())
}

/// Projector onto the eigenvector of `f` with the largest eigenvalue.
fn top_projector(f: &Operator) -> Result<Operator> {
    let (vals, vecs) = herm_eig(f)?;
    let top = vals.imax();
    let v = vecs.column(top).into_owned();
    Operator::new(1, f.d(), &v * v.adjoint())
}

/// The scenario's two-particle kernel, or `I + Φ/(4‖Φ‖)`.
fn pair_kernel(ctx: &Context) -> Operator {
    if let Some(g) = ctx.scenario.initial_state.kernel() {
        return g[0].clone();
    }
    let phi = ctx.system.spec().interaction();
    let norm = operator_norm(phi);
    let scale = if norm > 0.0 { 0.25 / norm } else { 0.0 };
    &Operator::identity(2, ctx.d()) + &phi.scale_real(scale)
}

pub(crate) fn vlasov_ic(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let sys = &ctx.system;
    let f = ctx.f1();
    let d = ctx.d();

    let grid: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
    let plain = vlasov_integrate(sys, &grid, &KineticState::new(f.clone(), 0, None)?, VlasovKind::Plain, Default::default())?;
    let identity = KineticState::new(f.clone(), 0, Some(vec![Operator::identity(2, d)]))?;
    let with_identity = vlasov_integrate(sys, &grid, &identity, VlasovKind::InitialCorrelations, Default::default())?;
    let gap = plain.states.iter().zip(&with_identity.states).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
    rec.at_most("identity_kernel_gap", gap, ctx.tol("identity_kernel", 1e-12));

    let mut kernel = ctx.scenario.initial_state.kernel().map(<[Operator]>::to_vec).unwrap_or_default();
    if kernel.is_empty() {
        kernel.push(pair_kernel(ctx));
    }
    let state = KineticState::new(f.clone(), 1, Some(kernel.clone()))?;
    let at_zero = dchaos_sequence(sys, 0.0, &state, &f, kernel.len() + 1)?;
    let mut dchaos_gap = at_zero.get(1)?.distance(&f);
    for (i, g) in kernel.iter().enumerate() {
        let want = g.compose(&tensor_power(&f, i + 2))?;
        dchaos_gap = dchaos_gap.max(at_zero.get(i + 2)?.distance(&want));
    }
    rec.at_most("dchaos_at_zero_gap", dchaos_gap, ctx.tol("dchaos_at_zero", 1e-15));

    let series_grid: Vec<f64> = std::iter::once(0.0).chain(SERIES_TIMES).collect();
    let fits = [
        ("plain_n_max2", KineticState::new(f.clone(), 2, None)?, VlasovKind::Plain),
        ("kernel_n_max1", KineticState::new(f.clone(), 1, Some(vec![pair_kernel(ctx)]))?, VlasovKind::InitialCorrelations),
    ];
    for (key, state, kind) in fits {
        let traj = vlasov_integrate(sys, &series_grid, &state, kind, Default::default())?;
        let gaps = SERIES_TIMES
            .iter()
            .zip(&traj.states[1..])
            .map(|(&t, f)| Ok(one_particle_series(sys, t, &state, SeriesMode::Limit)?.0.distance(f)))
            .collect::<Result<Vec<f64>>>()?;
        let (order, _, r2) = log_log_fit(&SERIES_TIMES, &gaps);
        rec.at_least(format!("{key}_fitted_order"), order, state.order as f64 + 1.0);
        rec.at_least(format!("{key}_r_squared"), r2, ctx.tol("vlasov_min_r_squared", 0.98));
    }

    let pure = top_projector(&f)?;
    let fine: Vec<f64> = (0..=20).map(|k| 0.05 * k as f64).collect();
    let traj = vlasov_integrate(sys, &fine, &KineticState::new(pure, 0, None)?, VlasovKind::Plain, Default::default())?;
    let traces = traj.traces();
    let purity = traj.purity_gaps();
    let herm = traj.hermiticity_gaps();
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    rec.at_most("trace_drift", traces.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max), ctx.tol("trace", 1e-9));
    rec.at_most("hermiticity_defect", max(&herm), ctx.tol("hermiticity", 1e-10));
    rec.at_most("purity_gap", max(&purity), ctx.tol("purity", 1e-8));
    let mut table = Table::new("vlasov_trajectory.csv", PlotKind::Trajectory, &["t", "trace", "purity_gap", "hermiticity_defect"]);
    for i in 0..fine.len() {
        table.rows.push(vec![Cell::Float(fine[i]), Cell::Float(traces[i]), Cell::Float(purity[i]), Cell::Float(herm[i])]);
    }
    rec.tables.push(table);
    Ok(())
}
