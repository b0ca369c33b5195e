use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, serde_matrix, tensor_power, Matrix, Operator, C64};

/// What a sequence of operators represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Observable,
    Density,
    Correlation,
    ReducedObservable,
    ReducedDensity,
    ReducedCorrelation,
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Observable => "observable",
            Self::Density => "density",
            Self::Correlation => "correlation",
            Self::ReducedObservable => "reduced_observable",
            Self::ReducedDensity => "reduced_density",
            Self::ReducedCorrelation => "reduced_correlation",
        };
        f.write_str(s)
    }
}

/// How the sequence continues past its last stored entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// Every entry beyond the last is zero (a state of finitely many particles).
    Finite,
    /// Entries beyond the last are unknown; expansions must stop before them.
    Truncated,
}

/// Entries `0..=max_n`, entry `n` acting on `n` particles.
#[derive(Debug, Clone)]
pub struct OperatorSequence {
    kind: SequenceKind,
    d: usize,
    entries: Vec<Operator>,
    closure: Closure,
    normalization: OnceLock<C64>,
}

impl PartialEq for OperatorSequence {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.d == other.d && self.closure == other.closure && self.entries == other.entries
    }
}

impl OperatorSequence {
    /// Builds a sequence from entries `0..=n`.
    pub fn new(kind: SequenceKind, d: usize, entries: Vec<Operator>, closure: Closure) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::MissingEntry { n: 0 });
        }
        for (n, e) in entries.iter().enumerate() {
            if e.d() != d {
                return Err(Error::DimensionMismatch { left: e.d(), right: d });
            }
            if e.n_particles() != n {
                return Err(Error::ParticleMismatch { expected: n, found: e.n_particles() });
            }
        }
        if matches!(kind, SequenceKind::Density | SequenceKind::ReducedDensity) {
            for e in &entries[1..] {
                e.check_hermitian()?;
            }
        }
        Ok(Self { kind, d, entries, closure, normalization: OnceLock::new() })
    }

    /// `(1, f, f⊗f, …)` up to `n` factors.
    pub fn factorized(kind: SequenceKind, f1: &Operator, n: usize, closure: Closure) -> Result<Self> {
        if f1.n_particles() != 1 {
            return Err(Error::ParticleMismatch { expected: 1, found: f1.n_particles() });
        }
        let entries = (0..=n).map(|k| tensor_power(f1, k)).collect();
        Self::new(kind, f1.d(), entries, closure)
    }

    /// Entries `1..=n` are `F^{⊗k}` for `k ≤ cutoff` and zero beyond; entry 0 is 1.
    pub fn finite_product_state(f1: &Operator, cutoff: usize, n: usize) -> Result<Self> {
        let d = f1.d();
        let entries =
            (0..=n).map(|k| if k <= cutoff { tensor_power(f1, k) } else { Operator::zeros(k, d) }).collect();
        Self::new(SequenceKind::Density, d, entries, Closure::Finite)
    }

    /// Sequence with only entry `k` nonzero (entries `0..=n`).
    pub fn single(kind: SequenceKind, op: Operator, n: usize, closure: Closure) -> Result<Self> {
        let d = op.d();
        let k = op.n_particles();
        if k > n {
            return Err(Error::TruncationOverflow { needed: k, available: n });
        }
        let mut entries: Vec<Operator> = (0..=n).map(|m| Operator::zeros(m, d)).collect();
        entries[k] = op;
        Self::new(kind, d, entries, closure)
    }

    pub(crate) fn from_parts(kind: SequenceKind, d: usize, entries: Vec<Operator>, closure: Closure) -> Self {
        Self { kind, d, entries, closure, normalization: OnceLock::new() }
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    /// Index of the last stored entry.
    pub fn max_n(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[Operator] {
        &self.entries
    }

    pub fn get(&self, n: usize) -> Result<&Operator> {
        self.entries.get(n).ok_or(Error::MissingEntry { n })
    }

    /// Entry `n`, with zero supplied past the end of a finite sequence.
    pub fn entry_or_zero(&self, n: usize) -> Result<Operator> {
        match self.entries.get(n) {
            Some(e) => Ok(e.clone()),
            None if self.closure == Closure::Finite => Ok(Operator::zeros(n, self.d)),
            None => Err(Error::TruncationOverflow { needed: n, available: self.max_n() }),
        }
    }

    pub fn expect_kind(&self, expected: SequenceKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::WrongKind { expected: expected.to_string(), found: self.kind.to_string() });
        }
        Ok(())
    }

    pub fn with_kind(mut self, kind: SequenceKind) -> Self {
        self.kind = kind;
        self.normalization = OnceLock::new();
        self
    }

    pub fn with_closure(mut self, closure: Closure) -> Self {
        self.closure = closure;
        self
    }

    /// `(I, D) = Σ_n (1/n!) Tr D_n`, cached after the first call.
    pub fn normalization(&self) -> C64 {
        *self.normalization.get_or_init(|| {
            let mut fact = 1.0;
            let mut acc = c(0.0, 0.0);
            for (n, e) in self.entries.iter().enumerate() {
                if n > 0 {
                    fact *= n as f64;
                }
                acc += e.trace() / fact;
            }
            acc
        })
    }

    /// Largest entrywise difference over the common range of indices.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max)
    }

    /// Largest trace-norm difference over the common range of indices.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    /// Entries `0..=n` only.
    pub fn truncate(&self, n: usize) -> Self {
        let keep = (n + 1).min(self.entries.len());
        let closure = if keep < self.entries.len() { Closure::Truncated } else { self.closure };
        Self::from_parts(self.kind, self.d, self.entries[..keep].to_vec(), closure)
    }

    /// Entrywise linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        if self.kind != other.kind {
            return Err(Error::WrongKind { expected: self.kind.to_string(), found: other.kind.to_string() });
        }
        let n = self.max_n().min(other.max_n());
        let entries = (0..=n).map(|k| &self.entries[k].scale_real(a) + &other.entries[k].scale_real(b)).collect();
        let closure = if self.closure == Closure::Finite && other.closure == Closure::Finite && self.max_n() == other.max_n() {
            Closure::Finite
        } else {
            Closure::Truncated
        };
        Ok(Self::from_parts(self.kind, self.d, entries, closure))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    kind: SequenceKind,
    d: usize,
    #[serde(default = "default_closure")]
    closure: Closure,
    entries: BTreeMap<usize, MatrixEntry>,
}

fn default_closure() -> Closure {
    Closure::Finite
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct MatrixEntry(#[serde(with = "serde_matrix")] Matrix);

impl Serialize for OperatorSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries.iter().enumerate().map(|(n, e)| (n, MatrixEntry(e.matrix().clone()))).collect();
        SequenceFile { kind: self.kind, d: self.d, closure: self.closure, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorSequence {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = SequenceFile::deserialize(de)?;
        let max = f.entries.keys().next_back().copied().unwrap_or(0);
        let mut entries = Vec::with_capacity(max + 1);
        for n in 0..=max {
            let op = match f.entries.get(&n) {
                Some(m) => Operator::new(n, f.d, m.0.clone()).map_err(D::Error::custom)?,
                None if n == 0 => {
                    let vacuum = match f.kind {
                        SequenceKind::Density | SequenceKind::ReducedDensity => 1.0,
                        _ => 0.0,
                    };
                    Operator::scalar(f.d, c(vacuum, 0.0))
                }
                None => return Err(D::Error::custom(Error::MissingEntry { n })),
            };
            entries.push(op);
        }
        OperatorSequence::new(f.kind, f.d, entries, f.closure).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_vacuum_default() {
        let f = Operator::from_real_diagonal(2, &[0.75, 0.25]).unwrap();
        let s = OperatorSequence::factorized(SequenceKind::ReducedDensity, &f, 2, Closure::Truncated).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: OperatorSequence = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
        let json = r#"{"kind":"density","d":2,"entries":{"1":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}}"#;
        let seq: OperatorSequence = serde_json::from_str(json).unwrap();
        assert_eq!(seq.get(0).unwrap().trace(), c(1.0, 0.0));
        assert_eq!(seq.closure(), Closure::Finite);
    }

    #[test]
    fn json_rejects_gaps_and_bad_shapes() {
        let gap = r#"{"kind":"density","d":2,"entries":{"2":[[[1,0]]]}}"#;
        assert!(serde_json::from_str::<OperatorSequence>(gap).is_err());
        let shape = r#"{"kind":"density","d":2,"entries":{"1":[[[1,0]]]}}"#;
        assert!(serde_json::from_str::<OperatorSequence>(shape).is_err());
    }

    #[test]
    fn normalization_counts_factorials() {
        let f = Operator::from_real_diagonal(2, &[0.75, 0.25]).unwrap();
        let s = OperatorSequence::factorized(SequenceKind::Density, &f, 3, Closure::Finite).unwrap();
        // 1 + 1 + 1/2 + 1/6
        assert!((s.normalization().re - (2.0 + 0.5 + 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn finite_sequences_pad_with_zero() {
        let f = Operator::from_real_diagonal(2, &[0.75, 0.25]).unwrap();
        let s = OperatorSequence::factorized(SequenceKind::Density, &f, 1, Closure::Finite).unwrap();
        assert_eq!(s.entry_or_zero(3).unwrap(), Operator::zeros(3, 2));
        let t = s.clone().with_closure(Closure::Truncated);
        assert!(matches!(t.entry_or_zero(3), Err(Error::TruncationOverflow { .. })));
    }
}
