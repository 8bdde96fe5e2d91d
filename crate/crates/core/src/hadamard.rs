//! Entrywise (Hadamard/Schur) algebra on nonnegative matrices.
//!
//! Hadamard powers use the convention `0^0 = 1`, so `A^(0)` is the all-ones
//! matrix and a factor with weight zero drops out of a weighted geometric
//! mean. With this convention `S_0(A) = A^T` and `S_1(A) = A` exactly. For
//! kernels vanishing on sets of positive measure this is a choice, not
//! something forced by the continuous theory.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::NonnegMatrix;

const SUM_TOL: f64 = 1e-12;

/// Normalization regime of a [`WeightVector`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRegime {
    /// Weights sum to one.
    UnitSum,
    /// Weights sum to at least one (matrix-only results).
    GeOneSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights")]
pub struct WeightVector {
    weights: Vec<f64>,
    regime: WeightRegime,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, regime: WeightRegime) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("weight vector must be nonempty"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(invalid(format!("weight {w} is not a finite nonnegative real")));
        }
        let sum: f64 = weights.iter().sum();
        match regime {
            WeightRegime::UnitSum if (sum - 1.0).abs() > SUM_TOL => Err(invalid(format!(
                "unit-sum weights sum to {sum}"
            ))),
            WeightRegime::GeOneSum if sum < 1.0 - SUM_TOL => Err(invalid(format!(
                "weights must sum to at least one, got {sum}"
            ))),
            _ => Ok(Self { weights, regime }),
        }
    }

    pub fn unit(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, WeightRegime::UnitSum)
    }

    /// `m` equal weights `1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("weight vector must be nonempty"));
        }
        Self::unit(vec![1.0 / m as f64; m])
    }

    /// The pair `(alpha, 1 - alpha)`.
    pub fn pair(alpha: AlphaValue) -> Self {
        Self {
            weights: vec![alpha.get(), 1.0 - alpha.get()],
            regime: WeightRegime::UnitSum,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn regime(&self) -> WeightRegime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Deserialize)]
struct RawWeights {
    weights: Vec<f64>,
    regime: WeightRegime,
}

impl TryFrom<RawWeights> for WeightVector {
    type Error = Error;

    fn try_from(raw: RawWeights) -> Result<Self> {
        Self::new(raw.weights, raw.regime)
    }
}

/// Symmetrization parameter in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AlphaValue(f64);

impl AlphaValue {
    pub const HALF: AlphaValue = AlphaValue(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(invalid(format!("alpha = {value} is outside [0, 1]")));
        }
        Ok(Self(value))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `1 - alpha`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl TryFrom<f64> for AlphaValue {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AlphaValue> for f64 {
    fn from(a: AlphaValue) -> f64 {
        a.0
    }
}

pub fn hadamard_product(a: &NonnegMatrix, b: &NonnegMatrix) -> Result<NonnegMatrix> {
    a.check_same_dim(b)?;
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .collect();
    Ok(NonnegMatrix::from_raw(a.dim(), data))
}

#[inline]
fn pow0(x: f64, alpha: f64) -> f64 {
    // powf already gives 0^0 = 1 and x^1 = x; keep the exponent-one path exact
    if alpha == 1.0 {
        x
    } else {
        x.powf(alpha)
    }
}

pub fn hadamard_power(a: &NonnegMatrix, alpha: f64) -> Result<NonnegMatrix> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(invalid(format!("Hadamard exponent {alpha} must be finite and >= 0")));
    }
    let out = a.map(|v| pow0(v, alpha));
    if out.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("Hadamard power overflowed".into()));
    }
    Ok(out)
}

/// Entry `(i, j)` is `prod_l (mats_l)_ij ^ w_l`.
pub fn weighted_geometric_mean(mats: &[NonnegMatrix], w: &WeightVector) -> Result<NonnegMatrix> {
    let refs: Vec<&NonnegMatrix> = mats.iter().collect();
    weighted_geometric_mean_refs(&refs, w)
}

pub(crate) fn weighted_geometric_mean_refs(
    mats: &[&NonnegMatrix],
    w: &WeightVector,
) -> Result<NonnegMatrix> {
    if mats.len() != w.len() {
        return Err(invalid(format!(
            "{} matrices but {} weights",
            mats.len(),
            w.len()
        )));
    }
    let first = mats.first().ok_or_else(|| invalid("no matrices given"))?;
    for m in &mats[1..] {
        first.check_same_dim(m)?;
    }
    let n2 = first.dim() * first.dim();
    let mut data = vec![1.0; n2];
    for (m, &alpha) in mats.iter().zip(w.weights()) {
        if alpha == 0.0 {
            continue;
        }
        for (d, &v) in data.iter_mut().zip(m.as_slice()) {
            *d *= pow0(v, alpha);
        }
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("weighted geometric mean overflowed".into()));
    }
    Ok(NonnegMatrix::from_raw(first.dim(), data))
}

/// `S_alpha(A) = A^(alpha) o (A^T)^(1 - alpha)`.
pub fn symmetrize_alpha(a: &NonnegMatrix, alpha: AlphaValue) -> NonnegMatrix {
    let at = a.transpose();
    hadamard_mean_pair(a, &at, alpha)
}

/// `A^(alpha) o B^(1 - alpha)` for a pair of equal-size matrices.
pub(crate) fn hadamard_mean_pair(
    a: &NonnegMatrix,
    b: &NonnegMatrix,
    alpha: AlphaValue,
) -> NonnegMatrix {
    debug_assert_eq!(a.dim(), b.dim());
    let (p, q) = (alpha.get(), 1.0 - alpha.get());
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| match (p == 0.0, q == 0.0) {
            (true, _) => y,
            (_, true) => x,
            _ => pow0(x, p) * pow0(y, q),
        })
        .collect();
    NonnegMatrix::from_raw(a.dim(), data)
}

/// Matrix adjoint, i.e. the transpose for real matrices.
pub fn adjoint(a: &NonnegMatrix) -> NonnegMatrix {
    a.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> NonnegMatrix {
        NonnegMatrix::from_rows(rows).unwrap()
    }

    fn alpha(v: f64) -> AlphaValue {
        AlphaValue::new(v).unwrap()
    }

    #[test]
    fn product_examples() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = m(&[&[5.0, 6.0], &[7.0, 8.0]]);
        assert_eq!(
            hadamard_product(&a, &b).unwrap(),
            m(&[&[5.0, 12.0], &[21.0, 32.0]])
        );
        assert_eq!(hadamard_product(&a, &NonnegMatrix::ones(2)).unwrap(), a);
        assert_eq!(
            hadamard_product(&a, &NonnegMatrix::zeros(2)).unwrap(),
            NonnegMatrix::zeros(2)
        );
        assert!(matches!(
            hadamard_product(&a, &NonnegMatrix::ones(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_examples() {
        let a = m(&[&[4.0, 9.0], &[0.0, 1.0]]);
        assert_eq!(hadamard_power(&a, 0.5).unwrap(), m(&[&[2.0, 3.0], &[0.0, 1.0]]));
        assert_eq!(hadamard_power(&a, 1.0).unwrap(), a);
        let b = m(&[&[0.0, 2.0], &[3.0, 0.0]]);
        assert_eq!(hadamard_power(&b, 0.0).unwrap(), NonnegMatrix::ones(2));
        assert!(hadamard_power(&a, -0.5).is_err());
        assert!(hadamard_power(&a, f64::NAN).is_err());
    }

    #[test]
    fn mean_examples() {
        let a = m(&[&[1.0, 4.0], &[9.0, 16.0]]);
        let b = m(&[&[4.0, 1.0], &[1.0, 4.0]]);
        let half = WeightVector::uniform(2).unwrap();
        assert_eq!(
            weighted_geometric_mean(&[a.clone(), a.clone()], &half).unwrap(),
            a
        );
        let g = weighted_geometric_mean(&[a.clone(), b.clone()], &half).unwrap();
        assert_eq!(g, m(&[&[2.0, 2.0], &[3.0, 8.0]]));
        let am = a.add(&b).unwrap().scale(0.5).unwrap();
        assert_eq!(am, m(&[&[2.5, 2.5], &[5.0, 10.0]]));
        assert!(g.le_entrywise(&am));

        // zero-weight factor drops out entirely, including zeros
        let z = NonnegMatrix::zeros(2);
        let w = WeightVector::unit(vec![1.0, 0.0]).unwrap();
        assert_eq!(weighted_geometric_mean(&[a.clone(), z], &w).unwrap(), a);

        assert!(weighted_geometric_mean(std::slice::from_ref(&a), &half).is_err());
        assert!(weighted_geometric_mean(&[a, NonnegMatrix::ones(3)], &half).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let a = m(&[&[0.0, 1.0], &[4.0, 0.0]]);
        assert_eq!(symmetrize_alpha(&a, AlphaValue::HALF), m(&[&[0.0, 2.0], &[2.0, 0.0]]));
        let b = m(&[&[1.0, 2.0], &[3.0, 0.0]]);
        assert_eq!(symmetrize_alpha(&b, alpha(0.0)), b.transpose());
        assert_eq!(symmetrize_alpha(&b, alpha(1.0)), b);

        let mut cycle = NonnegMatrix::zeros(3).into_vec();
        cycle[1] = 1.0;
        cycle[5] = 1.0;
        cycle[6] = 8.0;
        let cycle = NonnegMatrix::new(3, cycle).unwrap();
        assert!(symmetrize_alpha(&cycle, AlphaValue::HALF).is_zero());
    }

    #[test]
    fn adjoint_examples() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(adjoint(&a), m(&[&[1.0, 3.0], &[2.0, 4.0]]));
        assert_eq!(adjoint(&adjoint(&a)), a);
        let s = m(&[&[1.0, 5.0], &[5.0, 2.0]]);
        assert_eq!(adjoint(&s), s);
    }

    #[test]
    fn weight_vector_regimes() {
        assert!(WeightVector::unit(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::unit(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.6], WeightRegime::GeOneSum).is_ok());
        assert!(WeightVector::new(vec![0.2, 0.6], WeightRegime::GeOneSum).is_err());
        assert!(WeightVector::unit(vec![1.5, -0.5]).is_err());
        assert!(WeightVector::unit(vec![]).is_err());
        assert!(AlphaValue::new(1.5).is_err());
        assert!(AlphaValue::new(-0.1).is_err());
    }
}
