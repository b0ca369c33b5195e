//! Dense complex operators on tensor-product spaces `(C^d)^{⊗n}`.
//!
//! The product basis is ordered lexicographically with particle (site) 0 as
//! the slowest index. Sites are zero-based throughout the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

/// Tolerance for construction-time checks (Hermiticity, positivity).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for identities of the evolution groups.
pub const EVOLUTION_TOL: f64 = 1e-11;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Direction of a unitary conjugation.
///
/// `State` is `e^{-itH} X e^{itH}`, `Observable` is `e^{itH} X e^{-itH}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    State,
    Observable,
}

/// A dense operator on `n` particles with single-particle dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    n: usize,
    d: usize,
    mat: Matrix,
}

pub fn pow(d: usize, n: usize) -> usize {
    d.pow(n as u32)
}

impl Operator {
    pub fn new(n: usize, d: usize, mat: Matrix) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("single-particle dimension must be positive".into()));
        }
        let side = pow(d, n);
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::BadShape { side: mat.nrows().max(mat.ncols()), d, n });
        }
        Ok(Self { n, d, mat })
    }

    pub(crate) fn from_parts(n: usize, d: usize, mat: Matrix) -> Self {
        debug_assert_eq!(mat.nrows(), pow(d, n));
        Self { n, d, mat }
    }

    pub fn identity(n: usize, d: usize) -> Self {
        let side = pow(d, n);
        Self { n, d, mat: Matrix::identity(side, side) }
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        let side = pow(d, n);
        Self { n, d, mat: Matrix::zeros(side, side) }
    }

    /// The vacuum component: a 1×1 scalar.
    pub fn scalar(d: usize, value: C64) -> Self {
        Self { n: 0, d, mat: Matrix::from_element(1, 1, value) }
    }

    pub fn from_real_diagonal(d: usize, diag: &[f64]) -> Result<Self> {
        let side = diag.len();
        let mut n = 0;
        while pow(d, n) < side {
            n += 1;
        }
        let mat = Matrix::from_diagonal(&DVector::from_iterator(side, diag.iter().map(|&x| c(x, 0.0))));
        Self::new(n, d, mat)
    }

    pub fn from_rows(n: usize, d: usize, rows: &[Vec<C64>]) -> Result<Self> {
        let side = rows.len();
        if rows.iter().any(|r| r.len() != side) {
            return Err(Error::BadShape { side, d, n });
        }
        let mat = Matrix::from_fn(side, side, |i, j| rows[i][j]);
        Self::new(n, d, mat)
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn dagger(&self) -> Self {
        Self { n: self.n, d: self.d, mat: self.mat.adjoint() }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { n: self.n, d: self.d, mat: &self.mat * k }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(c(k, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut m = 0.0_f64;
        let side = self.dim();
        for i in 0..side {
            for j in i..side {
                m = m.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs().max(1.0)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let dev = self.hermiticity_defect();
        if dev <= CONSTRUCTION_TOL * self.max_abs().max(1.0) {
            Ok(())
        } else {
            Err(Error::NotHermitian { deviation: dev })
        }
    }

    /// Hermitian with spectrum bounded below by `-1e-12`.
    pub fn check_density(&self) -> Result<()> {
        self.check_hermitian()?;
        let (vals, _) = herm_eig(self)?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -CONSTRUCTION_TOL {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        self.same_space(rhs)?;
        Ok(Self { n: self.n, d: self.d, mat: gemm(&self.mat, false, &rhs.mat, false) })
    }

    /// `[self, rhs]`
    pub fn commutator(&self, rhs: &Operator) -> Result<Operator> {
        self.same_space(rhs)?;
        Ok(Self { n: self.n, d: self.d, mat: gemm(&self.mat, false, &rhs.mat, false) - gemm(&rhs.mat, false, &self.mat, false) })
    }

    pub fn same_space(&self, rhs: &Operator) -> Result<()> {
        if self.d != rhs.d {
            return Err(Error::DimensionMismatch { left: self.d, right: rhs.d });
        }
        if self.n != rhs.n {
            return Err(Error::ParticleMismatch { expected: self.n, found: rhs.n });
        }
        Ok(())
    }

    pub fn add_assign_scaled(&mut self, rhs: &Operator, k: f64) {
        debug_assert_eq!(self.dim(), rhs.dim());
        self.mat.zip_apply(&rhs.mat, |a, b| *a += b * k);
    }

    /// `V X V†`.
    pub fn conjugate_by(&self, v: &Matrix) -> Operator {
        Self { n: self.n, d: self.d, mat: conjugate_matrix(v, &self.mat, false) }
    }

    /// Trace norm of `self - rhs`.
    pub fn distance(&self, rhs: &Operator) -> f64 {
        trace_norm(&(self - rhs))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        Operator { n: self.n, d: self.d, mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        Operator { n: self.n, d: self.d, mat: &self.mat - &rhs.mat }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { n: self.n, d: self.d, mat: -&self.mat }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, k: f64) -> Operator {
        self.scale_real(k)
    }
}

/// Kronecker product; the factors of `a` come first.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.d != b.d {
        return Err(Error::DimensionMismatch { left: a.d, right: b.d });
    }
    Ok(Operator { n: a.n + b.n, d: a.d, mat: a.mat.kronecker(&b.mat) })
}

/// `op^{⊗k}`, with the 0-fold power being the scalar 1.
pub fn tensor_power(op: &Operator, k: usize) -> Operator {
    let mut acc = Operator::scalar(op.d, c(1.0, 0.0));
    for _ in 0..k {
        acc = Operator { n: acc.n + op.n, d: op.d, mat: acc.mat.kronecker(&op.mat) };
    }
    acc
}

fn validate_sites(sites: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &s in sites {
        if s >= n || seen[s] {
            return Err(Error::InvalidSites { labels: sites.to_vec(), n });
        }
        seen[s] = true;
    }
    Ok(())
}

/// Positional weight `d^{n-1-site}` of each site.
fn site_strides(d: usize, n: usize) -> Vec<usize> {
    (0..n).map(|s| pow(d, n - 1 - s)).collect()
}

/// Offsets contributed by the sites `sites` for every sub-index in `0..d^k`,
/// where the sub-index is itself lexicographic over `sites` in the given order.
fn sub_offsets(d: usize, n: usize, sites: &[usize]) -> Vec<usize> {
    let strides = site_strides(d, n);
    let k = sites.len();
    let mut out = Vec::with_capacity(pow(d, k));
    for a in 0..pow(d, k) {
        let mut rem = a;
        let mut off = 0;
        for m in (0..k).rev() {
            off += (rem % d) * strides[sites[m]];
            rem /= d;
        }
        out.push(off);
    }
    out
}

/// Acts with `op` on the listed sites of an `n`-particle space, identity elsewhere.
///
/// The i-th factor of `op` is placed on `sites[i]`.
pub fn embed(op: &Operator, sites: &[usize], n: usize) -> Result<Operator> {
    if sites.len() != op.n {
        return Err(Error::ParticleMismatch { expected: op.n, found: sites.len() });
    }
    validate_sites(sites, n)?;
    let d = op.d;
    let rest: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let inner = sub_offsets(d, n, sites);
    let outer = sub_offsets(d, n, &rest);
    let side = pow(d, n);
    let mut mat = Matrix::zeros(side, side);
    for &o in &outer {
        for (a, &ia) in inner.iter().enumerate() {
            for (b, &ib) in inner.iter().enumerate() {
                mat[(o + ia, o + ib)] = op.mat[(a, b)];
            }
        }
    }
    Ok(Operator { n, d, mat })
}

/// Embeds a raw `d^k × d^k` matrix on `sites` of an `n`-particle space.
pub(crate) fn embed_matrix(m: &Matrix, d: usize, sites: &[usize], n: usize) -> Matrix {
    let op = Operator::from_parts(sites.len(), d, m.clone());
    embed(&op, sites, n).expect("validated sites").mat
}

/// Reorders tensor factors: factor `i` of the result is factor `order[i]` of `a`.
pub fn permute_factors(a: &Operator, order: &[usize]) -> Result<Operator> {
    let n = a.n;
    if order.len() != n {
        return Err(Error::InvalidSites { labels: order.to_vec(), n });
    }
    validate_sites(order, n)?;
    // Index of the result in its own basis maps to the source basis by
    // reading result digits in the order of `order`.
    let src = sub_offsets(a.d, n, order);
    let side = a.dim();
    let mat = Matrix::from_fn(side, side, |i, j| a.mat[(src[i], src[j])]);
    Ok(Operator { n, d: a.d, mat })
}

/// Places operators on disjoint site sets covering `0..n` and multiplies them.
pub fn place(parts: &[(&Operator, &[usize])], n: usize) -> Result<Operator> {
    let d = parts.first().map(|(o, _)| o.d).ok_or_else(|| Error::InvalidArgument("no parts to place".into()))?;
    let mut acc = Operator::scalar(d, c(1.0, 0.0));
    let mut order = Vec::with_capacity(n);
    for (op, sites) in parts {
        if op.n != sites.len() {
            return Err(Error::ParticleMismatch { expected: op.n, found: sites.len() });
        }
        acc = tensor(&acc, op)?;
        order.extend_from_slice(sites);
    }
    if order.len() != n {
        return Err(Error::InvalidSites { labels: order, n });
    }
    validate_sites(&order, n)?;
    // acc has factor i on site order[i]; result factor s is acc factor pos(s).
    let mut inverse = vec![0; n];
    for (i, &s) in order.iter().enumerate() {
        inverse[s] = i;
    }
    permute_factors(&acc, &inverse)
}

/// Partial trace keeping the listed sites, in the listed order.
pub fn partial_trace(a: &Operator, keep: &[usize]) -> Result<Operator> {
    let n = a.n;
    validate_sites(keep, n)?;
    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let kept = sub_offsets(a.d, n, keep);
    let tr = sub_offsets(a.d, n, &traced);
    let side = kept.len();
    let mat = Matrix::from_fn(side, side, |i, j| {
        let (ri, rj) = (kept[i], kept[j]);
        tr.iter().map(|&z| a.mat[(ri + z, rj + z)]).sum()
    });
    Ok(Operator { n: keep.len(), d: a.d, mat })
}

/// Traces out every site from `from` upward, keeping `0..from`.
pub fn trace_tail(a: &Operator, from: usize) -> Result<Operator> {
    if from >= a.n {
        return if from == a.n { Ok(a.clone()) } else { Err(Error::InvalidSites { labels: vec![from], n: a.n }) };
    }
    let keep: Vec<usize> = (0..from).collect();
    partial_trace(a, &keep)
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
pub fn herm_eig(h: &Operator) -> Result<(DVector<f64>, Matrix)> {
    h.check_hermitian()?;
    Ok(herm_eig_matrix(&h.mat))
}

pub(crate) fn herm_eig_matrix(m: &Matrix) -> (DVector<f64>, Matrix) {
    // Symmetrize to kill round-off asymmetry before the solver sees it.
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(idx.len(), idx.iter().map(|&i| eig.eigenvalues[i]));
    let vecs = Matrix::from_fn(m.nrows(), idx.len(), |r, k| eig.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// `V diag(e^{-i t λ}) V†`.
pub(crate) fn unitary_from_eig(vals: &DVector<f64>, vecs: &Matrix, t: f64) -> Matrix {
    let phases = DVector::from_iterator(vals.len(), vals.iter().map(|&l| C64::from_polar(1.0, -t * l)));
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[k];
    }
    scaled * vecs.adjoint()
}

/// Unitary conjugation by the group generated by `h`.
pub fn conjugate_evolve(x: &Operator, h: &Operator, t: f64, direction: Direction) -> Result<Operator> {
    x.same_space(h)?;
    let (vals, vecs) = herm_eig(h)?;
    let u = unitary_from_eig(&vals, &vecs, t);
    Ok(match direction {
        Direction::State => x.conjugate_by(&u),
        Direction::Observable => Operator { mat: conjugate_matrix(&u, &x.mat, true), ..x.clone() },
    })
}

/// Sum of singular values.
pub fn trace_norm(a: &Operator) -> f64 {
    matrix_trace_norm(&a.mat)
}

pub(crate) fn matrix_trace_norm(m: &Matrix) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone().singular_values().iter().sum()
}

/// Largest singular value.
pub fn operator_norm(a: &Operator) -> f64 {
    if a.dim() == 1 {
        return a.mat[(0, 0)].norm();
    }
    a.mat.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// The swap of two factors of `C^d ⊗ C^d`.
pub fn swap(d: usize) -> Operator {
    let side = d * d;
    let mut mat = Matrix::zeros(side, side);
    for a in 0..d {
        for b in 0..d {
            mat[(b * d + a, a * d + b)] = c(1.0, 0.0);
        }
    }
    Operator { n: 2, d, mat }
}

/// Row-major nested `[re, im]` arrays.
pub mod serde_matrix {
    use super::{Matrix, C64};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &Matrix) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Matrix, String> {
        let side = rows.len();
        if side == 0 {
            return Err("empty matrix".into());
        }
        if let Some(r) = rows.iter().position(|r| r.len() != side) {
            return Err(format!("row {r} has length {} but the matrix has {side} rows", rows[r].len()));
        }
        if rows.iter().flatten().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
            return Err("non-finite matrix entry".into());
        }
        Ok(Matrix::from_fn(side, side, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
    }

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }
}

/// `op(a) · op(b)` through the packed complex kernel, with `op` the adjoint
/// where requested.
pub(crate) fn gemm(a: &Matrix, adjoint_a: bool, b: &Matrix, adjoint_b: bool) -> Matrix {
    // the kernel has no conjugating mode, so adjoints are materialized
    let a_adj;
    let a = if adjoint_a {
        a_adj = a.adjoint();
        &a_adj
    } else {
        a
    };
    let b_adj;
    let b = if adjoint_b {
        b_adj = b.adjoint();
        &b_adj
    } else {
        b
    };
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2, "inner dimensions differ");
    let mut out = Matrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    // SAFETY: Complex<f64> is repr(C) with two f64 fields and all three
    // matrices are contiguous column-major with the strides given.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    out
}

/// `v x v†`, or `v† x v` when `adjoint` is set.
pub(crate) fn conjugate_matrix(v: &Matrix, x: &Matrix, adjoint: bool) -> Matrix {
    if adjoint {
        gemm(&gemm(v, true, x, false), false, v, false)
    } else {
        gemm(&gemm(v, false, x, false), false, v, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_products_match_plain_products() {
        let a = Matrix::from_fn(5, 3, |i, j| c(i as f64 - 0.5 * j as f64, (i * j) as f64 % 1.7));
        let b = Matrix::from_fn(3, 4, |i, j| c((i + 2 * j) as f64 % 2.3, -(i as f64)));
        let sq = Matrix::from_fn(5, 5, |i, j| c((3 * i + j) as f64 % 1.9, (i + j) as f64 % 0.7));
        let gap = |x: Matrix, y: Matrix| (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gap(gemm(&a, false, &b, false), &a * &b) < 1e-13);
        assert!(gap(gemm(&b, true, &a, true), b.adjoint() * a.adjoint()) < 1e-13);
        assert!(gap(gemm(&a, false, &a, true), &a * a.adjoint()) < 1e-13);
        assert!(gap(conjugate_matrix(&sq, &sq, true), sq.adjoint() * &sq * &sq) < 1e-12);
    }

    fn diag(d: usize, v: &[f64]) -> Operator {
        Operator::from_real_diagonal(d, v).unwrap()
    }

    fn pauli_x() -> Operator {
        Operator::from_rows(1, 2, &[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap()
    }

    fn sample(n: usize, seed: u64) -> Operator {
        let side = pow(2, n);
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = Matrix::from_fn(side, side, |_, _| c(next(), next()));
        Operator::new(n, 2, m).unwrap()
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i = Operator::identity(1, 2);
        assert_eq!(tensor(&i, &i).unwrap(), Operator::identity(2, 2));
    }

    #[test]
    fn tensor_of_diagonals() {
        let rho = diag(2, &[0.75, 0.25]);
        let got = tensor(&rho, &rho).unwrap();
        let want = diag(2, &[9.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 1.0 / 16.0]);
        assert!((&got - &want).max_abs() < 1e-15);
    }

    #[test]
    fn tensor_rejects_mixed_dimensions() {
        let a = Operator::identity(1, 2);
        let b = Operator::identity(1, 3);
        assert!(matches!(tensor(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn embed_identity_case() {
        let k = pauli_x();
        assert_eq!(embed(&k, &[0], 1).unwrap(), k);
    }

    #[test]
    fn embeddings_on_disjoint_sites_commute() {
        let k = pauli_x();
        let a = embed(&k, &[0], 2).unwrap();
        let b = embed(&k, &[1], 2).unwrap();
        assert!((&a.compose(&b).unwrap() - &b.compose(&a).unwrap()).max_abs() < 1e-15);
    }

    #[test]
    fn embed_rejects_bad_labels() {
        let phi = Operator::identity(2, 2);
        assert!(embed(&phi, &[0, 0], 3).is_err());
        assert!(embed(&phi, &[0, 3], 3).is_err());
    }

    #[test]
    fn embed_on_first_sites_is_kronecker_with_identity() {
        let a = sample(2, 3);
        let got = embed(&a, &[0, 1], 3).unwrap();
        let want = tensor(&a, &Operator::identity(1, 2)).unwrap();
        assert!((&got - &want).max_abs() < 1e-15);
        // a on sites (1,2) is I ⊗ a
        let got = embed(&a, &[1, 2], 3).unwrap();
        let want = tensor(&Operator::identity(1, 2), &a).unwrap();
        assert!((&got - &want).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_identity_and_factorized_cases() {
        let a = sample(2, 7);
        assert_eq!(partial_trace(&a, &[0, 1]).unwrap(), a);
        let rho = sample(1, 11);
        let sigma = sample(1, 13);
        let got = partial_trace(&tensor(&rho, &sigma).unwrap(), &[0]).unwrap();
        let want = rho.scale(sigma.trace());
        assert!((&got - &want).max_abs() < 1e-14);
        let got = partial_trace(&tensor(&rho, &sigma).unwrap(), &[1]).unwrap();
        let want = sigma.scale(rho.trace());
        assert!((&got - &want).max_abs() < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let a = sample(3, 17);
        for keep in [vec![0], vec![1], vec![2, 0], vec![1, 2]] {
            let r = partial_trace(&a, &keep).unwrap();
            assert!((r.trace() - a.trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn permutation_roundtrip() {
        let a = sample(3, 19);
        let p = permute_factors(&a, &[2, 0, 1]).unwrap();
        let back = permute_factors(&p, &[1, 2, 0]).unwrap();
        assert!((&back - &a).max_abs() < 1e-15);
    }

    #[test]
    fn place_matches_embed_products() {
        let a = sample(1, 23);
        let b = sample(2, 29);
        let got = place(&[(&b, &[0, 2][..]), (&a, &[1][..])], 3).unwrap();
        let want = embed(&b, &[0, 2], 3).unwrap().compose(&embed(&a, &[1], 3).unwrap()).unwrap();
        assert!((&got - &want).max_abs() < 1e-14);
    }

    #[test]
    fn herm_eig_diagonal_and_pauli() {
        let (vals, vecs) = herm_eig(&diag(2, &[0.0, 1.0])).unwrap();
        assert_eq!(vals.as_slice(), &[0.0, 1.0]);
        assert!((vecs.map(|z| z.norm()) - nalgebra::DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
        let (vals, _) = herm_eig(&pauli_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let a = Operator::from_rows(1, 2, &[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]).unwrap();
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn evolution_at_zero_and_commuting_case() {
        let h = diag(2, &[0.3, -1.2]);
        let x = sample(1, 31);
        let at0 = conjugate_evolve(&x, &h, 0.0, Direction::State).unwrap();
        assert!((&at0 - &x).max_abs() < 1e-15);
        let commuting = diag(2, &[2.0, 5.0]);
        let y = conjugate_evolve(&commuting, &h, 0.7, Direction::State).unwrap();
        assert!((&y - &commuting).max_abs() < 1e-14);
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&Operator::identity(2, 2)) - 4.0).abs() < 1e-13);
        assert!((trace_norm(&diag(2, &[0.75, 0.25])) - 1.0).abs() < 1e-14);
        assert!((trace_norm(&diag(2, &[0.5, -2.0])) - 2.5).abs() < 1e-13);
    }

    #[test]
    fn swap_exchanges_factors() {
        let a = sample(1, 37);
        let b = sample(1, 41);
        let ab = tensor(&a, &b).unwrap();
        let ba = tensor(&b, &a).unwrap();
        let s = swap(2);
        assert!((&ab.conjugate_by(s.matrix()) - &ba).max_abs() < 1e-14);
    }

    #[test]
    fn from_rows_validates() {
        assert!(serde_matrix::from_rows(&[vec![[1.0, 0.0]], vec![]]).is_err());
        assert!(serde_matrix::from_rows(&[vec![[f64::NAN, 0.0]]]).is_err());
    }
}
