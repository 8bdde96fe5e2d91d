//! Finite sets of equal-dimension nonnegative matrices and the set-level
//! operations built on them: products, powers, Minkowski sums, weighted
//! Hadamard means and weighted geometric symmetrization.
//!
//! Elements are kept sorted lexicographically by entries and deduplicated by
//! exact bitwise equality, so every operation returns the same set in the
//! same order regardless of how its elements were computed. Approximate
//! membership is only used by the inclusion checks, never to shrink a set.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{numerical_radius, operator_norm, FunctionalId};
use crate::hadamard::{hadamard_mean_pair, weighted_geometric_mean_refs, AlphaValue, WeightRegime, WeightVector};
use crate::matrix::NonnegMatrix;

/// Default cap on the pre-dedup number of matrices a set operation may produce.
pub const DEFAULT_MAX_ELEMENTS: usize = 1_000_000;

/// Serialized as a [`MatrixSetDoc`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixSetDoc", into = "MatrixSetDoc")]
pub struct MatrixSet {
    dim: usize,
    elements: Vec<NonnegMatrix>,
}

impl MatrixSet {
    pub fn new(elements: Vec<NonnegMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| invalid("matrix set must be nonempty"))?
            .dim();
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        Ok(Self::canonical(dim, elements))
    }

    pub fn singleton(a: NonnegMatrix) -> Self {
        Self { dim: a.dim(), elements: vec![a] }
    }

    fn canonical(dim: usize, mut elements: Vec<NonnegMatrix>) -> Self {
        elements.sort_by(NonnegMatrix::lex_cmp);
        elements.dedup_by(|a, b| a.lex_cmp(b) == Ordering::Equal);
        Self { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[NonnegMatrix] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, NonnegMatrix> {
        self.elements.iter()
    }

    pub fn contains(&self, a: &NonnegMatrix) -> bool {
        self.elements
            .binary_search_by(|e| e.lex_cmp(a))
            .is_ok()
    }

    /// Membership up to `tol` entrywise (see [`NonnegMatrix::approx_eq`]).
    pub fn contains_approx(&self, a: &NonnegMatrix, tol: f64) -> bool {
        self.elements.iter().any(|e| e.approx_eq(a, tol))
    }

    /// Every element of `self` is within `tol` of some element of `other`.
    pub fn is_subset_approx(&self, other: &MatrixSet, tol: f64) -> bool {
        self.elements.iter().all(|e| other.contains_approx(e, tol))
    }

    /// Mutual approximate inclusion.
    pub fn approx_eq(&self, other: &MatrixSet, tol: f64) -> bool {
        self.is_subset_approx(other, tol) && other.is_subset_approx(self, tol)
    }

    /// `{A^T : A in self}`.
    pub fn adjoint(&self) -> Self {
        Self::canonical(self.dim, self.elements.iter().map(NonnegMatrix::transpose).collect())
    }

    fn check_dim(&self, other: &MatrixSet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn to_doc(&self) -> MatrixSetDoc {
        MatrixSetDoc {
            dim: self.dim,
            matrices: self.elements.iter().map(|e| e.as_slice().to_vec()).collect(),
        }
    }

    pub fn from_doc(doc: &MatrixSetDoc) -> Result<Self> {
        if doc.dim == 0 {
            return Err(invalid("matrix-set dim must be positive"));
        }
        let elements = doc
            .matrices
            .iter()
            .map(|m| NonnegMatrix::new(doc.dim, m.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }
}

impl<'a> IntoIterator for &'a MatrixSet {
    type Item = &'a NonnegMatrix;
    type IntoIter = std::slice::Iter<'a, NonnegMatrix>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

impl TryFrom<MatrixSetDoc> for MatrixSet {
    type Error = Error;

    fn try_from(doc: MatrixSetDoc) -> Result<Self> {
        Self::from_doc(&doc)
    }
}

impl From<MatrixSet> for MatrixSetDoc {
    fn from(s: MatrixSet) -> Self {
        s.to_doc()
    }
}

/// JSON interchange form: `{"dim": n, "matrices": [[n^2 row-major reals], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSetDoc {
    pub dim: usize,
    pub matrices: Vec<Vec<f64>>,
}

/// Whether a set-level Hadamard mean accepts weights summing to more than one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeanMode {
    /// Weights must sum to one (operator setting).
    UnitSum,
    /// Matrix-only mode, weights may sum to at least one.
    Matrix,
}

/// Set operations under a cardinality cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetAlgebra {
    pub max_elements: usize,
}

impl Default for SetAlgebra {
    fn default() -> Self {
        Self { max_elements: DEFAULT_MAX_ELEMENTS }
    }
}

impl SetAlgebra {
    fn check_count(&self, count: Option<usize>, what: &str) -> Result<()> {
        match count {
            Some(c) if c <= self.max_elements => Ok(()),
            _ => Err(Error::BudgetExceeded(format!(
                "{what} would produce more than {} matrices",
                self.max_elements
            ))),
        }
    }

    /// Applies `f` to every tuple of the cartesian product of `sets`.
    fn cartesian<F>(&self, sets: &[&MatrixSet], what: &str, f: F) -> Result<MatrixSet>
    where
        F: Fn(&[&NonnegMatrix]) -> Result<NonnegMatrix> + Sync,
    {
        let first = sets.first().ok_or_else(|| invalid(format!("{what}: no sets given")))?;
        for s in &sets[1..] {
            first.check_dim(s)?;
        }
        let count = sets
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.len()));
        self.check_count(count, what)?;
        let total = count.unwrap_or(0);
        let out = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                // mixed-radix decode, last set varies fastest
                let mut pick = vec![&sets[0].elements[0]; sets.len()];
                for (slot, s) in pick.iter_mut().zip(sets).rev() {
                    *slot = &s.elements[idx % s.len()];
                    idx /= s.len();
                }
                f(&pick)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixSet::canonical(first.dim, out))
    }

    /// `{AB : A in p, B in q}`.
    pub fn product(&self, p: &MatrixSet, q: &MatrixSet) -> Result<MatrixSet> {
        self.cartesian(&[p, q], "set product", |m| Ok(m[0].mul_unchecked(m[1])))
    }

    /// Product of a chain of sets, left to right.
    pub fn product_chain(&self, sets: &[&MatrixSet]) -> Result<MatrixSet> {
        let (first, rest) = sets
            .split_first()
            .ok_or_else(|| invalid("set product chain: no sets given"))?;
        rest.iter().try_fold((*first).clone(), |acc, s| self.product(&acc, s))
    }

    /// All length-`m` products of elements of `s`.
    pub fn power(&self, s: &MatrixSet, m: usize) -> Result<MatrixSet> {
        if m == 0 {
            return Err(invalid("set power exponent must be >= 1"));
        }
        let mut acc = s.clone();
        for _ in 1..m {
            acc = self.product(&acc, s)?;
        }
        Ok(acc)
    }

    /// Minkowski sum `{A_1 + ... + A_m : A_i in sets[i]}`.
    pub fn sum(&self, sets: &[&MatrixSet]) -> Result<MatrixSet> {
        self.cartesian(sets, "set sum", |m| {
            m[1..].iter().try_fold(m[0].clone(), |acc, x| acc.add(x))
        })
    }

    /// `{A_1^(w_1) o ... o A_m^(w_m) : A_i in sets[i]}`.
    pub fn hadamard_mean(
        &self,
        sets: &[&MatrixSet],
        w: &WeightVector,
        mode: MeanMode,
    ) -> Result<MatrixSet> {
        if mode == MeanMode::UnitSum && w.regime() != WeightRegime::UnitSum {
            return Err(invalid(
                "weights summing to more than one require matrix mode",
            ));
        }
        if sets.len() != w.len() {
            return Err(invalid(format!("{} sets but {} weights", sets.len(), w.len())));
        }
        self.cartesian(sets, "set Hadamard mean", |m| weighted_geometric_mean_refs(m, w))
    }

    /// `{A^(alpha) o (B^T)^(1 - alpha) : A, B in s}`, over all ordered pairs.
    pub fn symmetrize(&self, s: &MatrixSet, alpha: AlphaValue) -> Result<MatrixSet> {
        let adj = s.adjoint();
        self.hadamard_pair(s, &adj, alpha)
    }

    /// `{A^(alpha) o B^(1 - alpha) : A in p, B in q}`.
    pub fn hadamard_pair(&self, p: &MatrixSet, q: &MatrixSet, alpha: AlphaValue) -> Result<MatrixSet> {
        self.cartesian(&[p, q], "set symmetrization", |m| Ok(hadamard_mean_pair(m[0], m[1], alpha)))
    }
}

pub fn set_product(p: &MatrixSet, q: &MatrixSet) -> Result<MatrixSet> {
    SetAlgebra::default().product(p, q)
}

pub fn set_power(s: &MatrixSet, m: usize) -> Result<MatrixSet> {
    SetAlgebra::default().power(s, m)
}

pub fn set_sum(sets: &[&MatrixSet]) -> Result<MatrixSet> {
    SetAlgebra::default().sum(sets)
}

pub fn set_hadamard_mean(sets: &[&MatrixSet], w: &WeightVector, mode: MeanMode) -> Result<MatrixSet> {
    SetAlgebra::default().hadamard_mean(sets, w, mode)
}

pub fn set_symmetrize(s: &MatrixSet, alpha: AlphaValue) -> Result<MatrixSet> {
    SetAlgebra::default().symmetrize(s, alpha)
}

/// `sup` of the operator norm or numerical radius over the elements.
pub fn set_functional_sup(s: &MatrixSet, f: FunctionalId) -> Result<f64> {
    let eval = match f {
        FunctionalId::OperatorNorm => operator_norm,
        FunctionalId::NumericalRadius => numerical_radius,
        FunctionalId::SpectralRadius => {
            return Err(invalid(
                "the spectral radius of a set is a bracket, not an elementwise supremum",
            ))
        }
    };
    s.elements
        .par_iter()
        .map(eval)
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}
