//! Kinetic description: the state functional, generalized kinetic and Vlasov
//! equations, and the mean-field scaling limit.

mod generator;
mod integrate;
mod limit;
mod series;
mod sweep;

pub use generator::{apply_kinetic_generator, state_functional};
pub use integrate::{gqke_integrate, vlasov_integrate, IntegratorOptions, Trajectory, VlasovKind};
pub use limit::{
    chaos_check, correlation_propagation, dchaos_sequence, limit_observables, limit_system, meanfield_limit_check,
};
pub use series::{one_particle_series, SeriesMode};
pub use sweep::{fit_order, log_log_fit, SweepResult};

use crate::error::{Error, Result};
use crate::linalg::Operator;

/// One-particle data with an optional kernel of initial correlations.
///
/// `kernel[i]` acts on `i + 2` particles and multiplies `f₁^{⊗(i+2)}`.
#[derive(Debug, Clone)]
pub struct KineticState {
    pub f1: Operator,
    pub order: usize,
    pub kernel: Option<Vec<Operator>>,
}

impl KineticState {
    pub fn new(f1: Operator, order: usize, kernel: Option<Vec<Operator>>) -> Result<Self> {
        if f1.n_particles() != 1 {
            return Err(Error::ParticleMismatch { expected: 1, found: f1.n_particles() });
        }
        f1.check_hermitian()?;
        if let Some(k) = &kernel {
            for (i, g) in k.iter().enumerate() {
                if g.n_particles() != i + 2 {
                    return Err(Error::ParticleMismatch { expected: i + 2, found: g.n_particles() });
                }
                if g.d() != f1.d() {
                    return Err(Error::DimensionMismatch { left: g.d(), right: f1.d() });
                }
            }
        }
        Ok(Self { f1, order, kernel })
    }

    /// `g_n · f₁^{⊗n}`, or the plain product without a kernel entry.
    pub fn initial_entry(&self, f1: &Operator, n: usize) -> Result<Operator> {
        let product = crate::linalg::tensor_power(f1, n);
        match (&self.kernel, n) {
            (_, 0 | 1) | (None, _) => Ok(product),
            (Some(k), _) => match k.get(n - 2) {
                Some(g) => g.compose(&product),
                None => Err(Error::MissingEntry { n }),
            },
        }
    }
}
