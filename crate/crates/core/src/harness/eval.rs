//! Evaluation of a functional on a matrix or set, and the claim test
//! `rho(L) <= rho(R)` shared by all checks.

use serde::{Deserialize, Serialize};

use super::config::Rho;
use crate::error::Result;
use crate::functionals::{numerical_radius, operator_norm, spectral_radius, FunctionalId};
use crate::jsr::{compare_rho, radius_bracket, Comparison, EnumerationBudget, Interval};
use crate::matrix::NonnegMatrix;
use crate::set::{set_functional_sup, MatrixSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Inconclusive,
    /// A numerical failure while evaluating the trial.
    Error,
    Violation,
}

impl Outcome {
    fn severity(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Inconclusive => 1,
            Outcome::Error => 2,
            Outcome::Violation => 3,
        }
    }

    /// The more severe of the two.
    pub fn worst(self, other: Outcome) -> Outcome {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "ok",
            Outcome::Inconclusive => "inconclusive",
            Outcome::Error => "error",
            Outcome::Violation => "violation",
        }
    }
}

/// One tested inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub label: String,
    pub rho: Option<Rho>,
    pub lhs: Interval,
    pub rhs: Interval,
    /// `(upper(rhs) - lower(lhs)) / max(upper(rhs), lower(lhs))`; negative
    /// means the claim looks violated before tolerances.
    pub margin: f64,
    pub outcome: Outcome,
    /// Exploratory links: a violation is a finding, not a failure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub soft: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub exact: f64,
    pub bracket: f64,
}

pub fn relative_margin(lhs: &Interval, rhs: &Interval) -> f64 {
    let scale = rhs.upper.max(lhs.lower);
    if scale == 0.0 {
        0.0
    } else {
        (rhs.upper - lhs.lower) / scale
    }
}

/// Outcome of the claim `lhs <= rhs` under bracket semantics.
pub fn judge(lhs: &Interval, rhs: &Interval, tol: Tolerances) -> Outcome {
    let t = if lhs.is_exact() && rhs.is_exact() { tol.exact } else { tol.bracket };
    match compare_rho(lhs, rhs, t) {
        Comparison::Violation => Outcome::Violation,
        Comparison::Consistent if lhs.partial || rhs.partial => Outcome::Inconclusive,
        Comparison::Consistent => Outcome::Pass,
    }
}

pub fn claim(label: &str, rho: Option<Rho>, lhs: Interval, rhs: Interval, tol: Tolerances) -> LinkResult {
    LinkResult {
        label: label.to_owned(),
        rho,
        lhs,
        rhs,
        margin: relative_margin(&lhs, &rhs),
        outcome: judge(&lhs, &rhs, tol),
        soft: false,
    }
}

pub fn eval_matrix(a: &NonnegMatrix, rho: Rho) -> Result<f64> {
    match rho {
        Rho::R | Rho::Gsr | Rho::Jsr => spectral_radius(a),
        Rho::Norm => operator_norm(a),
        Rho::W => numerical_radius(a),
    }
}

/// Deepest enumeration whose full product tree fits in the product cap, so
/// that a bracket is only flagged partial when even depth 1 does not fit.
pub fn fitted_budget(len: usize, budget: &EnumerationBudget) -> EnumerationBudget {
    let mut total = 0usize;
    let mut level = 1usize;
    let mut depth = 0;
    while depth < budget.max_depth {
        level = level.saturating_mul(len);
        total = total.saturating_add(level);
        if total > budget.max_products {
            break;
        }
        depth += 1;
    }
    EnumerationBudget { max_depth: depth.max(1), ..*budget }
}

/// `rho` of a set: elementwise sup for `norm` and `w`, the exact radius for
/// singletons, otherwise a bracket.
pub fn eval_set(s: &MatrixSet, rho: Rho, budget: &EnumerationBudget) -> Result<Interval> {
    match rho.radius_kind() {
        None => {
            let f = if rho == Rho::Norm {
                FunctionalId::OperatorNorm
            } else {
                FunctionalId::NumericalRadius
            };
            Ok(Interval::exact(set_functional_sup(s, f)?))
        }
        Some(_) if s.len() == 1 => Ok(Interval::exact(spectral_radius(&s.elements()[0])?)),
        Some(kind) => {
            let b = fitted_budget(s.len(), budget);
            Ok(radius_bracket(s, kind, &b)?.interval())
        }
    }
}

/// `prod_j x_j^(w_j)`, left to right.
pub fn weighted_product(values: &[Interval], weights: &[f64]) -> Interval {
    values
        .iter()
        .zip(weights)
        .fold(Interval::exact(1.0), |acc, (v, &w)| acc * v.powf(w))
}
