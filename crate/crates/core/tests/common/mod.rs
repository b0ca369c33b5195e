//! Brute-force reference computations shared by the integration tests.
//! Nothing here calls into the crate's evolution or reduction code.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

pub type M = DMatrix<C>;

pub fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

/// `op` on consecutive factors starting at `at` among `n` factors of dimension `d`.
pub fn on_site(op: &M, at: usize, width: usize, n: usize, d: usize) -> M {
    let left = eye(d.pow(at as u32));
    let right = eye(d.pow((n - at - width) as u32));
    kron(&kron(&left, op), &right)
}

/// Pair operator on arbitrary factors `(i, j)` via explicit index permutation.
pub fn on_pair(op: &M, i: usize, j: usize, n: usize, d: usize) -> M {
    let side = d.pow(n as u32);
    let digit = |x: usize, k: usize| (x / d.pow((n - 1 - k) as u32)) % d;
    M::from_fn(side, side, |r, c| {
        for k in 0..n {
            if k != i && k != j && digit(r, k) != digit(c, k) {
                return C::new(0.0, 0.0);
            }
        }
        op[(digit(r, i) * d + digit(r, j), digit(c, i) * d + digit(c, j))]
    })
}

pub fn hamiltonian(k: &M, phi: &M, eps: f64, n: usize, d: usize) -> M {
    let side = d.pow(n as u32);
    let mut h = M::zeros(side, side);
    for j in 0..n {
        h += on_site(k, j, 1, n, d);
    }
    for i in 0..n {
        for j in i + 1..n {
            h += on_pair(phi, i, j, n, d) * C::new(eps, 0.0);
        }
    }
    h
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &M) -> M {
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let b = a * C::new(1.0 / 2f64.powi(s), 0.0);
    let mut term = eye(a.nrows());
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &b * C::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn propagator(h: &M, t: f64) -> M {
    expm(&(h * C::new(0.0, -t)))
}

/// Keeps the first `keep` of `n` factors by explicit index summation.
pub fn trace_tail(a: &M, keep: usize, n: usize, d: usize) -> M {
    let ks = d.pow(keep as u32);
    let rs = d.pow((n - keep) as u32);
    M::from_fn(ks, ks, |i, j| (0..rs).map(|z| a[(i * rs + z, j * rs + z)]).sum())
}

pub fn trace_norm(a: &M) -> f64 {
    a.clone().singular_values().iter().sum()
}

pub fn max_abs(a: &M) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Deterministic pseudo-random Hermitian matrix.
pub fn random_hermitian(side: usize, seed: u64) -> M {
    let mut st = seed ^ 0x9E37_79B9_7F4A_7C15;
    let mut next = || {
        st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((st >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let m = M::from_fn(side, side, |_, _| C::new(next(), next()));
    (&m + m.adjoint()) * C::new(0.5, 0.0)
}

pub fn cm1_k() -> M {
    M::from_row_slice(2, 2, &[C::new(0., 0.), C::new(1., 0.), C::new(1., 0.), C::new(0., 0.)])
}

pub fn cm1_phi() -> M {
    M::from_diagonal(&nalgebra::DVector::from_vec(vec![C::new(0., 0.), C::new(0., 0.), C::new(0., 0.), C::new(1., 0.)]))
}

pub fn cm1_f0() -> M {
    M::from_diagonal(&nalgebra::DVector::from_vec(vec![C::new(0.75, 0.), C::new(0.25, 0.)]))
}

pub fn power(a: &M, k: usize) -> M {
    let mut acc = eye(1);
    for _ in 0..k {
        acc = kron(&acc, a);
    }
    acc
}

/// Reduced densities of the finite sequence `d` (entry `n` on `n` particles).
pub fn reduce(d: &[M], dim: usize) -> Vec<M> {
    let big = d.len() - 1;
    let norm: C = d.iter().enumerate().map(|(n, x)| x.trace() / factorial(n)).sum();
    (0..=big)
        .map(|s| {
            let mut acc = M::zeros(dim.pow(s as u32), dim.pow(s as u32));
            for n in 0..=big - s {
                acc += trace_tail(&d[s + n], s, s + n, dim) * C::new(1.0 / factorial(n), 0.0);
            }
            acc / norm
        })
        .collect()
}

/// `op` (on `sites.len()` factors) placed on `sites` of `n`, by index loops.
pub fn embed_subset(op: &M, sites: &[usize], n: usize, d: usize) -> M {
    let side = d.pow(n as u32);
    let digit = |x: usize, k: usize| (x / d.pow((n - 1 - k) as u32)) % d;
    let sub = |x: usize| sites.iter().fold(0, |acc, &s| acc * d + digit(x, s));
    M::from_fn(side, side, |r, c| {
        for k in 0..n {
            if !sites.contains(&k) && digit(r, k) != digit(c, k) {
                return C::new(0.0, 0.0);
            }
        }
        op[(sub(r), sub(c))]
    })
}

/// Subsets of `0..n` as sorted lists.
pub fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0..1usize << n).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

/// Reduced observables by inclusion–exclusion.
pub fn reduce_obs(a: &[M], d: usize) -> Vec<M> {
    (0..a.len())
        .map(|s| {
            let side = d.pow(s as u32);
            let mut acc = M::zeros(side, side);
            for kept in subsets(s) {
                let sign = if (s - kept.len()) % 2 == 0 { 1.0 } else { -1.0 };
                acc += embed_subset(&a[kept.len()], &kept, s, d) * C::new(sign, 0.0);
            }
            acc
        })
        .collect()
}
