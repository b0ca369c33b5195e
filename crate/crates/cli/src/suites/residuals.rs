//! Central-difference residuals of the constructed solutions against the
//! right-hand sides of their hierarchies.

use bbgky::hierarchy::*;
use bbgky::kinetic::limit_observables;
use bbgky::Result;

use super::Context;
use crate::report::SuiteRecord;

const H: f64 = 1e-4;

type Path<'a> = Box<dyn Fn(f64) -> Result<OperatorSequence> + 'a>;

fn residual(ctx: &Context, kind: HierarchyKind, t: f64, path: &dyn Fn(f64) -> Result<OperatorSequence>) -> Result<f64> {
    let deriv = path(t + H)?.combine(0.5 / H, &path(t - H)?, -0.5 / H)?;
    let rhs = hierarchy_rhs(&ctx.system, kind, &path(t)?)?;
    let mut worst = 0.0_f64;
    for s in 1..=rhs.max_n().min(deriv.max_n()) {
        worst = worst.max(deriv.get(s)?.distance(rhs.get(s)?));
    }
    Ok(worst)
}

pub(crate) fn run(ctx: &Context, rec: &mut SuiteRecord) -> Result<()> {
    let sys = &ctx.system;
    let dseq = ctx.finite_density()?;
    let g0 = density_to_clusters(&dseq)?;
    let f0 = reduce_density(&dseq)?;
    let (_, b0, _) = super::oracle::observables(ctx)?.pop().expect("a general observable");
    let states = |t| Ok(bbgky_series_solution(sys, t, &f0, SeriesRoute::Cumulant)?.sequence);
    let paths: [(&str, HierarchyKind, Path<'_>); 5] = [
        ("von_neumann", HierarchyKind::VonNeumannHierarchy, Box::new(|t| evolve_correlations(sys, t, &g0))),
        ("bbgky", HierarchyKind::Bbgky, Box::new(states)),
        ("dual_bbgky", HierarchyKind::DualBbgky, Box::new(|t| dual_bbgky_solution(sys, t, &b0, ObservableType::General))),
        (
            "nonlinear_bbgky",
            HierarchyKind::NonlinearBbgky,
            Box::new(|t| Ok(reduced_correlations(sys, &states(t)?, CorrelationMode::FromReduced)?.sequence)),
        ),
        ("dual_vlasov", HierarchyKind::DualVlasov, Box::new(|t| limit_observables(sys, t, &b0, ObservableType::General))),
    ];
    let tol = ctx.tol("residuals", 1e-6);
    let times: Vec<f64> = std::iter::once(0.0).chain(ctx.scenario.t_grid.iter().copied()).collect();
    for (name, kind, path) in &paths {
        let mut worst = 0.0_f64;
        for &t in &times {
            worst = worst.max(residual(ctx, *kind, t, path.as_ref())?);
        }
        rec.at_most(format!("{name}_residual"), worst, tol);
    }
    Ok(())
}
