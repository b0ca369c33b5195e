//! Hamiltonians, evolution groups, cumulants of groups and scattering groups.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{all_set_partitions, cumulant_coefficient};
use crate::error::{Error, Result};
use crate::linalg::{
    c, conjugate_matrix, embed_matrix, herm_eig_matrix, place, pow, serde_matrix, swap, unitary_from_eig, Direction, Matrix, Operator,
    CONSTRUCTION_TOL, C64,
};

/// Largest total dimension `d^n` the engine will build.
pub const MAX_DIM: usize = 256;

/// Largest particle number whose space fits in [`MAX_DIM`].
pub fn max_particles(d: usize) -> usize {
    if d <= 1 {
        return 16;
    }
    let mut n = 0;
    while pow(d, n + 1) <= MAX_DIM {
        n += 1;
    }
    n
}

/// Physical and truncation parameters of an `N`-particle system with
/// one-particle kinetic term `K` and pair interaction `Φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct SystemSpec {
    d: usize,
    kinetic: Operator,
    interaction: Operator,
    epsilon: f64,
    n_max_particles: usize,
    series_order: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    d: usize,
    #[serde(with = "serde_matrix")]
    kinetic: Matrix,
    #[serde(with = "serde_matrix")]
    interaction: Matrix,
    epsilon: f64,
    n_max_particles: usize,
    series_order: usize,
}

impl TryFrom<SpecFile> for SystemSpec {
    type Error = Error;
    fn try_from(f: SpecFile) -> Result<Self> {
        let k = Operator::new(1, f.d, f.kinetic)?;
        let phi = Operator::new(2, f.d, f.interaction)?;
        SystemSpec::new(k, phi, f.epsilon, f.n_max_particles, f.series_order)
    }
}

impl From<SystemSpec> for SpecFile {
    fn from(s: SystemSpec) -> Self {
        SpecFile {
            d: s.d,
            kinetic: s.kinetic.into_matrix(),
            interaction: s.interaction.into_matrix(),
            epsilon: s.epsilon,
            n_max_particles: s.n_max_particles,
            series_order: s.series_order,
        }
    }
}

impl SystemSpec {
    pub fn new(
        kinetic: Operator,
        interaction: Operator,
        epsilon: f64,
        n_max_particles: usize,
        series_order: usize,
    ) -> Result<Self> {
        let d = kinetic.d();
        if kinetic.n_particles() != 1 {
            return Err(Error::InvalidSpec("kinetic matrix must act on one particle".into()));
        }
        if interaction.n_particles() != 2 || interaction.d() != d {
            return Err(Error::InvalidSpec(format!("interaction must be a {}x{} matrix", d * d, d * d)));
        }
        kinetic.check_hermitian().map_err(|e| Error::InvalidSpec(format!("kinetic: {e}")))?;
        interaction.check_hermitian().map_err(|e| Error::InvalidSpec(format!("interaction: {e}")))?;
        let s = swap(d);
        let exchanged = interaction.conjugate_by(s.matrix());
        let defect = (&exchanged - &interaction).max_abs();
        if defect > CONSTRUCTION_TOL * interaction.max_abs().max(1.0) {
            return Err(Error::InvalidSpec(format!("interaction is not exchange symmetric (defect {defect:.3e})")));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidSpec(format!("epsilon must be finite and non-negative, got {epsilon}")));
        }
        if n_max_particles < 1 {
            return Err(Error::InvalidSpec("n_max_particles must be at least 1".into()));
        }
        let cap = max_particles(d);
        if n_max_particles > cap {
            return Err(Error::InvalidSpec(format!("n_max_particles {n_max_particles} exceeds {cap} for d = {d}")));
        }
        Ok(Self { d, kinetic, interaction, epsilon, n_max_particles, series_order })
    }

    /// The two-level reference model: `K = σx`, `Φ = |11⟩⟨11|`, `ε = 1/2`, `N = 3`.
    pub fn cm1() -> Self {
        let k = Operator::from_rows(1, 2, &[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap();
        let phi = Operator::from_real_diagonal(2, &[0., 0., 0., 1.]).unwrap();
        Self::new(k, phi, 0.5, 3, 3).unwrap()
    }

    /// One-particle initial state of the reference model.
    pub fn cm1_initial_state() -> Operator {
        Operator::from_real_diagonal(2, &[0.75, 0.25]).unwrap()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.kinetic.clone(), self.interaction.clone(), epsilon, self.n_max_particles, self.series_order)
    }

    pub fn with_n_max_particles(&self, n: usize) -> Result<Self> {
        Self::new(self.kinetic.clone(), self.interaction.clone(), self.epsilon, n, self.series_order)
    }

    pub fn with_series_order(&self, n: usize) -> Self {
        Self { series_order: n, ..self.clone() }
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn kinetic(&self) -> &Operator {
        &self.kinetic
    }
    pub fn interaction(&self) -> &Operator {
        &self.interaction
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn n_max_particles(&self) -> usize {
        self.n_max_particles
    }
    pub fn series_order(&self) -> usize {
        self.series_order
    }
}

/// Which family of unitaries a block evolves with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    /// `e^{-itH_k}` with the full interacting Hamiltonian.
    Interacting,
    /// Products of one-particle free groups.
    Free,
    /// `e^{-itH_k} (e^{-itK})^{⊗k †}`.
    Scattering,
}

type Eigen = (DVector<f64>, Matrix);

/// A validated system with cached spectral data of its Hamiltonians.
#[derive(Debug)]
pub struct System {
    spec: SystemSpec,
    eig: Vec<OnceLock<Eigen>>,
    kinetic_eig: Eigen,
}

impl System {
    pub fn new(spec: SystemSpec) -> Self {
        let cap = max_particles(spec.d);
        let kinetic_eig = herm_eig_matrix(spec.kinetic.matrix());
        Self { eig: (0..=cap).map(|_| OnceLock::new()).collect(), kinetic_eig, spec }
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.spec.d
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    pub fn max_particles(&self) -> usize {
        self.eig.len() - 1
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n < 1 || n > self.max_particles() {
            return Err(Error::ParticlesOutOfRange { n, max: self.max_particles() });
        }
        Ok(())
    }

    /// `H_n = Σ_j K(j) + ε Σ_{j1<j2} Φ(j1,j2)`.
    pub fn hamiltonian(&self, n: usize) -> Result<Operator> {
        self.check_n(n)?;
        Ok(Operator::from_parts(n, self.d(), self.hamiltonian_matrix(n, self.spec.epsilon)))
    }

    fn hamiltonian_matrix(&self, n: usize, epsilon: f64) -> Matrix {
        let d = self.d();
        let side = pow(d, n);
        let mut h = Matrix::zeros(side, side);
        for j in 0..n {
            h += embed_matrix(self.spec.kinetic.matrix(), d, &[j], n);
        }
        if epsilon != 0.0 {
            let e = c(epsilon, 0.0);
            for j1 in 0..n {
                for j2 in j1 + 1..n {
                    h += embed_matrix(self.spec.interaction.matrix(), d, &[j1, j2], n) * e;
                }
            }
        }
        h
    }

    fn eigen(&self, n: usize) -> &Eigen {
        self.eig[n].get_or_init(|| herm_eig_matrix(&self.hamiltonian_matrix(n, self.spec.epsilon)))
    }

    /// Unitary of the given kind on `k` sites labelled `0..k`.
    pub fn block_unitary(&self, kind: GroupKind, k: usize, t: f64) -> Result<Matrix> {
        if k == 0 {
            return Ok(Matrix::identity(1, 1));
        }
        self.check_n(k)?;
        if t == 0.0 {
            // exact, so that cumulants of order ≥ 2 cancel without roundoff
            return Ok(Matrix::identity(pow(self.d(), k), pow(self.d(), k)));
        }
        let free = || {
            let u1 = unitary_from_eig(&self.kinetic_eig.0, &self.kinetic_eig.1, t);
            let mut acc = Matrix::identity(1, 1);
            for _ in 0..k {
                acc = acc.kronecker(&u1);
            }
            acc
        };
        Ok(match kind {
            GroupKind::Interacting => {
                let (v, w) = self.eigen(k);
                unitary_from_eig(v, w, t)
            }
            GroupKind::Free => free(),
            GroupKind::Scattering => {
                let (v, w) = self.eigen(k);
                unitary_from_eig(v, w, t) * free().adjoint()
            }
        })
    }

    fn commutator_term(&self, x: &Operator, h: &Matrix, direction: Direction) -> Operator {
        let comm = h * x.matrix() - x.matrix() * h;
        let k = match direction {
            Direction::State => c(0.0, -1.0),
            Direction::Observable => c(0.0, 1.0),
        };
        Operator::from_parts(x.n_particles(), x.d(), comm * k)
    }

    fn check_operand(&self, x: &Operator) -> Result<()> {
        if x.d() != self.d() {
            return Err(Error::DimensionMismatch { left: x.d(), right: self.d() });
        }
        self.check_n(x.n_particles())
    }

    /// `-i[H_n, X]` (state) or `i[H_n, X]` (observable).
    pub fn generator(&self, x: &Operator, direction: Direction) -> Result<Operator> {
        self.check_operand(x)?;
        let h = self.hamiltonian_matrix(x.n_particles(), self.spec.epsilon);
        Ok(self.commutator_term(x, &h, direction))
    }

    /// The generator of the free group: Σ_j of the one-particle terms.
    pub fn free_generator(&self, x: &Operator, direction: Direction) -> Result<Operator> {
        self.check_operand(x)?;
        let h = self.hamiltonian_matrix(x.n_particles(), 0.0);
        Ok(self.commutator_term(x, &h, direction))
    }

    /// `∓i[K(j), X]`.
    pub fn kinetic_term(&self, x: &Operator, j: usize, direction: Direction) -> Result<Operator> {
        self.check_operand(x)?;
        let n = x.n_particles();
        if j >= n {
            return Err(Error::InvalidSites { labels: vec![j], n });
        }
        let k = embed_matrix(self.spec.kinetic.matrix(), self.d(), &[j], n);
        Ok(self.commutator_term(x, &k, direction))
    }

    /// `∓i[Φ(i,j), X]`, without the factor ε.
    pub fn interaction_term(&self, x: &Operator, i: usize, j: usize, direction: Direction) -> Result<Operator> {
        self.check_operand(x)?;
        let n = x.n_particles();
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidSites { labels: vec![i, j], n });
        }
        let phi = embed_matrix(self.spec.interaction.matrix(), self.d(), &[i, j], n);
        Ok(self.commutator_term(x, &phi, direction))
    }

    pub fn propagator(&self, t: f64) -> Propagator<'_> {
        Propagator { system: self, t, blocks: Mutex::new(HashMap::new()), products: Mutex::new(HashMap::new()) }
    }
}

type ProductKey = (GroupKind, usize, Vec<Vec<usize>>);

/// Evolution groups at a fixed time, caching block unitaries and their
/// embedded products.
#[derive(Debug)]
pub struct Propagator<'a> {
    system: &'a System,
    t: f64,
    blocks: Mutex<HashMap<(GroupKind, usize), Arc<Matrix>>>,
    products: Mutex<HashMap<ProductKey, Arc<Matrix>>>,
}

fn validate_blocks(blocks: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for b in blocks {
        if b.is_empty() {
            return Err(Error::InvalidArgument("cluster blocks must be non-empty".into()));
        }
        for &s in b {
            if s >= n || seen[s] {
                return Err(Error::InvalidSites { labels: blocks.concat(), n });
            }
            seen[s] = true;
        }
    }
    Ok(())
}

fn conjugate(x: &Operator, u: &Matrix, direction: Direction) -> Matrix {
    match direction {
        Direction::State => conjugate_matrix(u, x.matrix(), false),
        Direction::Observable => conjugate_matrix(u, x.matrix(), true),
    }
}

impl<'a> Propagator<'a> {
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn system(&self) -> &'a System {
        self.system
    }

    fn block(&self, kind: GroupKind, k: usize) -> Result<Arc<Matrix>> {
        if let Some(m) = self.blocks.lock().unwrap().get(&(kind, k)) {
            return Ok(m.clone());
        }
        let m = Arc::new(self.system.block_unitary(kind, k, self.t)?);
        self.blocks.lock().unwrap().insert((kind, k), m.clone());
        Ok(m)
    }

    /// Product of block unitaries placed on disjoint `parts` of `0..n`,
    /// identity on uncovered sites.
    pub fn product_unitary(&self, kind: GroupKind, parts: &[Vec<usize>], n: usize) -> Result<Arc<Matrix>> {
        validate_blocks(parts, n)?;
        let mut key_parts: Vec<Vec<usize>> = parts
            .iter()
            .map(|p| {
                let mut p = p.clone();
                p.sort_unstable();
                p
            })
            .collect();
        key_parts.sort();
        let key = (kind, n, key_parts);
        if let Some(m) = self.products.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let d = self.system.d();
        let mut ops = Vec::with_capacity(key.2.len() + 1);
        let mut covered = vec![false; n];
        for p in &key.2 {
            let u = self.block(kind, p.len())?;
            ops.push((Operator::from_parts(p.len(), d, (*u).clone()), p.clone()));
            for &s in p {
                covered[s] = true;
            }
        }
        let rest: Vec<usize> = (0..n).filter(|&s| !covered[s]).collect();
        if !rest.is_empty() {
            ops.push((Operator::identity(rest.len(), d), rest));
        }
        let m = if n == 0 {
            Matrix::identity(1, 1)
        } else {
            let refs: Vec<(&Operator, &[usize])> = ops.iter().map(|(o, s)| (o, s.as_slice())).collect();
            place(&refs, n)?.into_matrix()
        };
        let m = Arc::new(m);
        self.products.lock().unwrap().insert(key, m.clone());
        Ok(m)
    }

    fn check(&self, x: &Operator) -> Result<()> {
        if x.d() != self.system.d() {
            return Err(Error::DimensionMismatch { left: x.d(), right: self.system.d() });
        }
        if x.n_particles() > self.system.max_particles() {
            return Err(Error::ParticlesOutOfRange { n: x.n_particles(), max: self.system.max_particles() });
        }
        Ok(())
    }

    /// The group of the given kind acting on all particles of `x`.
    pub fn group(&self, kind: GroupKind, x: &Operator, direction: Direction) -> Result<Operator> {
        self.check(x)?;
        let n = x.n_particles();
        let all: Vec<Vec<usize>> = if n == 0 { vec![] } else { vec![(0..n).collect()] };
        let u = self.product_unitary(kind, &all, n)?;
        Ok(Operator::from_parts(n, x.d(), conjugate(x, &u, direction)))
    }

    /// Independent groups on each block of `parts`, identity elsewhere.
    pub fn product_group(&self, kind: GroupKind, parts: &[Vec<usize>], x: &Operator, direction: Direction) -> Result<Operator> {
        self.check(x)?;
        let u = self.product_unitary(kind, parts, x.n_particles())?;
        Ok(Operator::from_parts(x.n_particles(), x.d(), conjugate(x, &u, direction)))
    }

    /// Cumulant of groups over the cluster argument `blocks`:
    /// `Σ_{P'} (−1)^{|P'|−1}(|P'|−1)! ∏_{Z∈P'} G_{|θ(Z)|}(θ(Z))` applied to `x`.
    pub fn cumulant(&self, kind: GroupKind, blocks: &[Vec<usize>], x: &Operator, direction: Direction) -> Result<Operator> {
        self.check(x)?;
        let n = x.n_particles();
        validate_blocks(blocks, n)?;
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("cumulant needs at least one block".into()));
        }
        let idx: Vec<usize> = (0..blocks.len()).collect();
        let mut acc = Matrix::zeros(x.dim(), x.dim());
        for p in all_set_partitions(&idx) {
            let merged: Vec<Vec<usize>> = p.blocks().iter().map(|z| z.iter().flat_map(|&i| blocks[i].iter().cloned()).collect()).collect();
            let u = self.product_unitary(kind, &merged, n)?;
            let coef = cumulant_coefficient(p.len())? as f64;
            acc += conjugate(x, &u, direction) * C64::new(coef, 0.0);
        }
        Ok(Operator::from_parts(n, x.d(), acc))
    }

    /// The scattering group on all particles of `x`.
    pub fn scattering(&self, x: &Operator, direction: Direction) -> Result<Operator> {
        self.group(GroupKind::Scattering, x, direction)
    }
}
