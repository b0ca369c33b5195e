//! Sequences of many-particle operators, their cluster expansions, reduced
//! descriptions, and the series solutions of the hierarchies they obey.

mod clusters;
mod dual;
mod functionals;
mod iteration;
mod rhs;
mod sequence;
mod series;

pub use clusters::{
    clusters_to_density, correlations_from_reduced, density_to_clusters, expand_observable, reduce_density,
    reduce_observable,
};
pub use dual::{dual_bbgky_solution, ObservableType};
pub(crate) use dual::check_support;
pub use functionals::{additive_observable, dispersion, expectation, expectation_complex, mean_value};
pub use iteration::{bbgky_iteration_solution, gauss_legendre, iteration_term, QUADRATURE_TOL};
pub(crate) use iteration::{nested_term, refine, GL_POINTS};
pub use rhs::{hierarchy_rhs, HierarchyKind};
pub use sequence::{Closure, OperatorSequence, SequenceKind};
pub use series::{
    bbgky_series_solution, convergence_radius, evolve_cluster_correlations, evolve_correlations, reduced_correlations,
    CorrelationMode, SeriesRoute, SeriesSolution,
};

pub(crate) use series::{cumulant_term, guard};
