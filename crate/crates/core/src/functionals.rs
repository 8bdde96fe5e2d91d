//! Spectral radius, operator norm and numerical radius of a single
//! nonnegative matrix.
//!
//! All three reduce to the Perron root of a nonnegative matrix:
//! `||A|| = r(A^T A)^(1/2)` and, on the positive cone, `w(A) = r((A + A^T)/2)`.
//! The Perron root is computed by repeated squaring with the row-sum norm
//! (Gelfand's formula along `m = 2^k`). Entries never cancel, so the
//! accumulated relative rounding error stays at a few units of `n * eps`
//! regardless of how many squarings are taken.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::NonnegMatrix;

/// Default cap on matrix products per Perron-root evaluation.
pub const DEFAULT_PRODUCT_BUDGET: u64 = 1_000_000;

/// Which single-operator functional to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalId {
    SpectralRadius,
    OperatorNorm,
    NumericalRadius,
}

impl FunctionalId {
    pub fn evaluate(self, a: &NonnegMatrix) -> Result<f64> {
        match self {
            FunctionalId::SpectralRadius => spectral_radius(a),
            FunctionalId::OperatorNorm => operator_norm(a),
            FunctionalId::NumericalRadius => numerical_radius(a),
        }
    }
}

/// Perron root `max |lambda|` of `a`.
pub fn spectral_radius(a: &NonnegMatrix) -> Result<f64> {
    spectral_radius_with_budget(a, DEFAULT_PRODUCT_BUDGET)
}

pub fn spectral_radius_with_budget(a: &NonnegMatrix, budget: u64) -> Result<f64> {
    squaring(a, budget).map(|s| s.radius)
}

/// Largest singular value.
pub fn operator_norm(a: &NonnegMatrix) -> Result<f64> {
    let gram = a.transpose().mul_unchecked(a);
    Ok(spectral_radius(&gram)?.sqrt())
}

/// Numerical radius, via the Perron root of the symmetric part.
pub fn numerical_radius(a: &NonnegMatrix) -> Result<f64> {
    let at = a.transpose();
    let sym = NonnegMatrix::from_raw(
        a.dim(),
        a.as_slice()
            .iter()
            .zip(at.as_slice())
            .map(|(x, y)| 0.5 * (x + y))
            .collect(),
    );
    spectral_radius(&sym)
}

struct Squared {
    radius: f64,
    /// `A^(2^k) / ||A^(2^k)||_inf` at exit, `None` for 1x1 or zero matrices.
    power: Option<NonnegMatrix>,
}

fn squaring(a: &NonnegMatrix, budget: u64) -> Result<Squared> {
    let n = a.dim();
    if n == 1 {
        return Ok(Squared { radius: a.get(0, 0), power: None });
    }
    let s0 = a.row_sum_norm();
    if s0 == 0.0 {
        return Ok(Squared { radius: 0.0, power: None });
    }
    let mut b = a.map(|v| v / s0);
    // log ||A^m||^(1/m)
    let mut ell = s0.ln();
    let mut m = 1.0_f64;
    // a nilpotent or transient prefix can keep the norm flat for up to ~n steps
    let min_steps = (usize::BITS - (n - 1).leading_zeros()) as u64 + 3;
    let mut quiet = 0;
    let mut step = 0u64;
    while step < budget {
        step += 1;
        b = b.mul_unchecked(&b);
        m *= 2.0;
        let s = b.row_sum_norm();
        if s == 0.0 {
            return Ok(Squared { radius: 0.0, power: None });
        }
        if !s.is_finite() {
            return Err(Error::NumericalFailure("overflow while squaring".into()));
        }
        b = b.map(|v| v / s);
        let delta = s.ln() / m;
        ell += delta;
        if delta.abs() <= 1e-15 * ell.abs().max(1.0) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if step >= min_steps && quiet >= 2 {
            return Ok(Squared { radius: ell.exp(), power: Some(b) });
        }
    }
    Err(Error::NumericalFailure(format!(
        "spectral radius did not converge within {budget} matrix products"
    )))
}

/// A strictly positive approximation of a right Perron vector of `a`,
/// normalized to unit max entry. Any positive vector is acceptable to the
/// callers (it only weights a norm), the Perron direction just makes the
/// weighted norm tight.
pub(crate) fn positive_perron_vector(a: &NonnegMatrix) -> Result<Vec<f64>> {
    const FLOOR: f64 = 1e-280;
    let n = a.dim();
    let sq = squaring(a, DEFAULT_PRODUCT_BUDGET)?;
    let mut v = match sq.power {
        Some(b) => b.rows().map(|r| r.iter().sum::<f64>()).collect::<Vec<_>>(),
        None => vec![1.0; n],
    };
    let top = v.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        v.fill(1.0);
    } else {
        for x in &mut v {
            *x = (*x / top).max(FLOOR);
        }
    }
    Ok(v)
}

/// `max_i (A v)_i / v_i` for a positive weight vector `v`: the operator norm
/// of `A` induced by the `v`-weighted max-norm.
pub(crate) fn weighted_row_norm(a: &NonnegMatrix, v: &[f64]) -> f64 {
    a.rows()
        .zip(v)
        .map(|(row, &vi)| row.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() / vi)
        .fold(0.0, f64::max)
}
