use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("single-particle dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("particle number mismatch: expected {expected}, found {found}")]
    ParticleMismatch { expected: usize, found: usize },

    #[error("matrix of side {side} is not a {d}^{n} operator")]
    BadShape { side: usize, d: usize, n: usize },

    #[error("invalid site labels {labels:?} for a {n}-particle operator")]
    InvalidSites { labels: Vec<usize>, n: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not a density operator: {0}")]
    NotDensity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("particle number {n} outside the supported range 1..={max}")]
    ParticlesOutOfRange { n: usize, max: usize },

    #[error("sequence is missing entry {n}")]
    MissingEntry { n: usize },

    #[error("expansion needs entry {needed} but the sequence stops at {available}")]
    TruncationOverflow { needed: usize, available: usize },

    #[error("sequence kind {found} where {expected} was required")]
    WrongKind { expected: String, found: String },

    #[error("|t| = {t} is outside the convergence radius t0 = {t0}")]
    ConvergenceGuard { t: f64, t0: f64 },

    #[error("quadrature did not reach tolerance {tol:.1e} (last change {change:.3e})")]
    Quadrature { tol: f64, change: f64 },

    #[error("integrator step rejected at t = {t}: error estimate {estimate:.3e} exceeds {tol:.1e}")]
    StepRejected { t: f64, estimate: f64, tol: f64 },

    #[error("normalization of the density sequence vanishes")]
    ZeroNormalization,

    #[error("type hint inconsistent with data: {0}")]
    InconsistentHint(String),

    #[error("invalid system specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
