use crate::dynamics::{GroupKind, System};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, partial_trace, tensor, trace_norm, Direction, Operator};

use super::generator::state_functional;
use super::limit::limit_system;
use super::KineticState;

/// Per-step error tolerance of the step-halving estimate.
pub const STEP_TOL: f64 = 1e-8;

/// Fixed-step settings for the fourth-order integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Largest step; `None` uses `0.05 / ‖H₂‖`.
    pub max_step: Option<f64>,
    pub tol: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { max_step: None, tol: STEP_TOL }
    }
}

/// Collision term of the Vlasov equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VlasovKind {
    /// `Tr₂ 𝒩*_int(1,2) f⊗f`.
    Plain,
    /// `Tr₂ 𝒩*_int(1,2) (𝒢*₂(t) g₂⁰) f⊗f` with free groups around the kernel.
    InitialCorrelations,
}

/// States on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
}

impl Trajectory {
    pub fn traces(&self) -> Vec<f64> {
        self.states.iter().map(|f| f.trace().re).collect()
    }

    /// `‖f² − f‖₁` along the trajectory.
    pub fn purity_gaps(&self) -> Vec<f64> {
        self.states.iter().map(|f| trace_norm(&(&f.compose(f).expect("same space") - f))).collect()
    }

    pub fn hermiticity_gaps(&self) -> Vec<f64> {
        self.states.iter().map(Operator::hermiticity_defect).collect()
    }
}

/// One classical step from `y` given its slope `k1`.
fn rk4_step(rhs: &impl Fn(f64, &Operator) -> Result<Operator>, t: f64, y: &Operator, k1: &Operator, h: f64) -> Result<Operator> {
    let k2 = rhs(t + 0.5 * h, &(y + &(k1 * (0.5 * h))))?;
    let k3 = rhs(t + 0.5 * h, &(y + &(&k2 * (0.5 * h))))?;
    let k4 = rhs(t + h, &(y + &(&k3 * h)))?;
    let mut out = y.clone();
    out.add_assign_scaled(k1, h / 6.0);
    out.add_assign_scaled(&k2, h / 3.0);
    out.add_assign_scaled(&k3, h / 3.0);
    out.add_assign_scaled(&k4, h / 6.0);
    Ok(out)
}

/// Classical fourth-order steps between grid points. Every step is also taken
/// as two half steps; their gap over 15 estimates the local error and the
/// extrapolated combination is kept.
fn integrate(
    grid: &[f64],
    y0: &Operator,
    max_step: f64,
    tol: f64,
    rhs: impl Fn(f64, &Operator) -> Result<Operator>,
) -> Result<Trajectory> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be finite and strictly increasing".into()));
    }
    if max_step.is_nan() || max_step <= 0.0 {
        return Err(Error::InvalidArgument("step size must be positive".into()));
    }
    let mut states = vec![y0.clone()];
    let mut y = y0.clone();
    for w in grid.windows(2) {
        let steps = ((w[1] - w[0]) / max_step).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / steps as f64;
        for k in 0..steps {
            let t = w[0] + k as f64 * h;
            let k1 = rhs(t, &y)?;
            let full = rk4_step(&rhs, t, &y, &k1, h)?;
            let half = rk4_step(&rhs, t, &y, &k1, 0.5 * h)?;
            let twice = rk4_step(&rhs, t + 0.5 * h, &half, &rhs(t + 0.5 * h, &half)?, 0.5 * h)?;
            let gap = &twice - &full;
            let estimate = trace_norm(&gap) / 15.0;
            if estimate.is_nan() || estimate > tol {
                return Err(Error::StepRejected { t, estimate, tol });
            }
            y = &twice + &(&gap * (1.0 / 15.0));
        }
        states.push(y.clone());
    }
    Ok(Trajectory { times: grid.to_vec(), states })
}

fn default_step(system: &System, options: IntegratorOptions) -> Result<f64> {
    match options.max_step {
        Some(h) => Ok(h),
        None => {
            let norm = operator_norm(&system.hamiltonian(2)?);
            Ok(if norm > 0.0 { 0.05 / norm } else { 0.05 })
        }
    }
}

/// `Tr₂ 𝒩*_int(1,2) Y` with unit coupling.
fn pair_collision(system: &System, y: &Operator) -> Result<Operator> {
    partial_trace(&system.interaction_term(y, 0, 1, Direction::State)?, &[0])
}

/// Trajectory of the generalized kinetic equation
/// `∂_t F₁ = 𝒩*(1)F₁ + ε Tr₂ 𝒩*_int(1,2) F₂(t | F₁(t))` from `grid[0]`.
pub fn gqke_integrate(system: &System, grid: &[f64], state: &KineticState, options: IntegratorOptions) -> Result<Trajectory> {
    if state.kernel.is_some() {
        return Err(Error::InvalidArgument("the kinetic equation is closed only for factorized data".into()));
    }
    let eps = system.epsilon();
    let rhs = |t: f64, f: &Operator| -> Result<Operator> {
        let own = system.generator(f, Direction::State)?;
        if eps == 0.0 {
            return Ok(own);
        }
        let (f2, _) = state_functional(system, t, 2, f, state.order)?;
        Ok(&own + &pair_collision(system, &f2)?.scale_real(eps))
    };
    integrate(grid, &state.f1, default_step(system, options)?, options.tol, rhs)
}

/// Trajectory of the quantum Vlasov equation, optionally with the collision
/// term weighted by the freely evolved initial pair correlation.
pub fn vlasov_integrate(
    system: &System,
    grid: &[f64],
    state: &KineticState,
    kind: VlasovKind,
    options: IntegratorOptions,
) -> Result<Trajectory> {
    state.f1.check_density()?;
    let tr = state.f1.trace();
    if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
        return Err(Error::NotDensity(format!("trace {:.6e} instead of 1", tr.re)));
    }
    let limit = limit_system(system)?;
    let g2 = match kind {
        VlasovKind::Plain => None,
        VlasovKind::InitialCorrelations => match state.kernel.as_ref().and_then(|k| k.first()) {
            Some(g) => Some(g.clone()),
            None => return Err(Error::MissingEntry { n: 2 }),
        },
    };
    let t0 = grid.first().copied().unwrap_or(0.0);
    let rhs = |t: f64, f: &Operator| -> Result<Operator> {
        let own = limit.generator(f, Direction::State)?;
        let pair = tensor(f, f)?;
        let weighted = match &g2 {
            None => pair,
            Some(g) => {
                let u = limit.block_unitary(GroupKind::Free, 2, t - t0)?;
                g.conjugate_by(&u).compose(&pair)?
            }
        };
        Ok(&own + &pair_collision(&limit, &weighted)?)
    };
    integrate(grid, &state.f1, default_step(&limit, options)?, options.tol, rhs)
}
