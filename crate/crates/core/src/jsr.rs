//! Certified brackets for the generalized and joint spectral radius of a
//! finite set of nonnegative matrices.
//!
//! For every product length `m`:
//!
//! * `(max_{A in S^m} r(A))^(1/m) <= r(S)` (the generalized radius is a sup
//!   over `m`), and
//! * `j(S) <= (max_{A in S^m} ||A||)^(1/m)` for any operator norm, by
//!   submultiplicativity.
//!
//! For finite matrix sets `r(S) = j(S)` (Berger-Wang), so both radii share
//! the bracket `[lower, upper]`. The upper side takes the minimum over the
//! spectral norm and over max-norms weighted by approximate Perron vectors
//! of the set; the weighted norms make the bracket collapse on singletons,
//! where the spectral norm alone converges only like `C^(1/m)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{operator_norm, positive_perron_vector, spectral_radius, weighted_row_norm};
use crate::matrix::NonnegMatrix;
use crate::set::MatrixSet;

/// Levels with more products than this skip dominance pruning (quadratic).
const PRUNE_LIMIT: usize = 4096;
/// Per-element Perron weights are only tried for small sets.
const PER_ELEMENT_WEIGHTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusKind {
    Generalized,
    Joint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub max_depth: usize,
    pub max_products: usize,
    pub prune: bool,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_depth: 8, max_products: 200_000, prune: true }
    }
}

impl EnumerationBudget {
    pub fn with_depth(max_depth: usize) -> Self {
        Self { max_depth, ..Self::default() }
    }

    fn validate(&self, set_len: usize) -> Result<()> {
        if self.max_depth < 1 {
            return Err(invalid("enumeration depth must be >= 1"));
        }
        if self.max_products < set_len {
            return Err(invalid(format!(
                "max_products = {} is smaller than the set ({set_len} elements)",
                self.max_products
            )));
        }
        Ok(())
    }
}

/// One side of a bracket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideBound {
    pub value: f64,
    pub depth_used: usize,
    pub partial: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusBracket {
    pub lower: f64,
    pub upper: f64,
    pub depth_used: usize,
    pub functional: RadiusKind,
    pub partial: bool,
}

impl RadiusBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn interval(&self) -> Interval {
        Interval { lower: self.lower, upper: self.upper, partial: self.partial }
    }
}

/// A closed interval of nonnegative reals known to contain some quantity.
/// Exact values are degenerate intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub partial: bool,
}

impl Interval {
    pub fn exact(v: f64) -> Self {
        Self { lower: v, upper: v, partial: false }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper && !self.partial
    }

    /// Monotone power `x^p`, `p >= 0`, with `0^0 = 1`.
    pub fn powf(self, p: f64) -> Interval {
        if p == 1.0 {
            return self;
        }
        Interval { lower: self.lower.powf(p), upper: self.upper.powf(p), partial: self.partial }
    }

    pub fn sqrt(self) -> Interval {
        Interval { lower: self.lower.sqrt(), upper: self.upper.sqrt(), partial: self.partial }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Product of nonnegative intervals.
impl std::ops::Mul for Interval {
    type Output = Interval;

    fn mul(self, other: Interval) -> Interval {
        Interval {
            lower: self.lower * other.lower,
            upper: self.upper * other.upper,
            partial: self.partial || other.partial,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Consistent,
    Violation,
}

/// Tests the claim `rho(L) <= rho(R)` against brackets: a violation is
/// reported only when `lower(L) > upper(R) * (1 + tol) + tol`, which (for
/// sound brackets) means the claim is false. Consistency is a necessary
/// condition only.
pub fn compare_rho(lhs: &Interval, rhs: &Interval, tol: f64) -> Comparison {
    if lhs.lower > rhs.upper * (1.0 + tol) + tol {
        Comparison::Violation
    } else {
        Comparison::Consistent
    }
}

pub fn compare_brackets(lhs: &RadiusBracket, rhs: &RadiusBracket, tol: f64) -> Result<Comparison> {
    if lhs.functional != rhs.functional {
        return Err(invalid(format!(
            "cannot compare a {:?} bracket with a {:?} bracket",
            lhs.functional, rhs.functional
        )));
    }
    Ok(compare_rho(&lhs.interval(), &rhs.interval(), tol))
}

/// `max_{A in S^m} r(A)^(1/m)` over `m <= max_depth`.
pub fn gsr_lower_bound(s: &MatrixSet, b: &EnumerationBudget) -> Result<SideBound> {
    let e = enumerate(s, b, Needs { spectral_norm: false, weights: &[] })?;
    Ok(SideBound { value: e.lower(), depth_used: e.depth_used(), partial: e.partial })
}

/// `min_m (max_{A in S^m} ||A||_2)^(1/m)` over `m <= max_depth`.
pub fn jsr_upper_bound(s: &MatrixSet, b: &EnumerationBudget) -> Result<SideBound> {
    let e = enumerate(s, b, Needs { spectral_norm: true, weights: &[] })?;
    Ok(SideBound { value: e.upper(), depth_used: e.depth_used(), partial: e.partial })
}

/// Bracket shared by the generalized and joint spectral radius.
pub fn radius_bracket(s: &MatrixSet, which: RadiusKind, b: &EnumerationBudget) -> Result<RadiusBracket> {
    let weights = norm_weights(s)?;
    let e = enumerate(s, b, Needs { spectral_norm: true, weights: &weights })?;
    let lower = e.lower();
    let mut upper = e.upper();
    // the two routes can cross by a few ulps when they meet
    if upper < lower && lower - upper <= 1e-13 * lower {
        upper = lower;
    }
    Ok(RadiusBracket {
        lower,
        upper,
        depth_used: e.depth_used(),
        functional: which,
        partial: e.partial,
    })
}

/// Positive weights for the weighted max-norms (`Row`) and weighted
/// one-norms (`Col`, evaluated on the transpose).
#[derive(Clone, Debug)]
enum NormWeight {
    Row(Vec<f64>),
    Col(Vec<f64>),
}

impl NormWeight {
    fn norm(&self, a: &NonnegMatrix, at: &NonnegMatrix) -> f64 {
        match self {
            NormWeight::Row(v) => weighted_row_norm(a, v),
            NormWeight::Col(v) => weighted_row_norm(at, v),
        }
    }
}

fn norm_weights(s: &MatrixSet) -> Result<Vec<NormWeight>> {
    let total = s.iter().skip(1).fold(s.elements()[0].clone(), |acc, a| {
        acc.add(a).expect("set elements share a dimension")
    });
    let mut sources = vec![total];
    if s.len() > 1 && s.len() <= PER_ELEMENT_WEIGHTS {
        sources.extend(s.iter().cloned());
    }
    let mut out = Vec::with_capacity(2 * sources.len());
    for src in &sources {
        out.push(NormWeight::Row(positive_perron_vector(src)?));
        out.push(NormWeight::Col(positive_perron_vector(&src.transpose())?));
    }
    Ok(out)
}

struct Needs<'a> {
    spectral_norm: bool,
    weights: &'a [NormWeight],
}

#[derive(Debug)]
struct Level {
    depth: usize,
    max_radius: f64,
    /// Smallest of the per-norm maxima over the level.
    max_norm: f64,
}

#[derive(Debug)]
struct Enumeration {
    levels: Vec<Level>,
    partial: bool,
}

impl Enumeration {
    fn depth_used(&self) -> usize {
        self.levels.last().map_or(0, |l| l.depth)
    }

    fn lower(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| root(l.max_radius, l.depth))
            .fold(0.0, f64::max)
    }

    fn upper(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| root(l.max_norm, l.depth))
            .fold(f64::INFINITY, f64::min)
    }
}

fn root(x: f64, m: usize) -> f64 {
    if m == 1 {
        x
    } else {
        x.powf(1.0 / m as f64)
    }
}

fn enumerate(s: &MatrixSet, b: &EnumerationBudget, needs: Needs<'_>) -> Result<Enumeration> {
    b.validate(s.len())?;
    let base = s.elements();
    let mut level: Vec<NonnegMatrix> = base.to_vec();
    if b.prune {
        level = prune_dominated(level);
    }
    let mut used = base.len();
    let mut levels = Vec::new();
    let mut partial = false;
    for depth in 1..=b.max_depth {
        levels.push(measure(&level, depth, &needs)?);
        if depth == b.max_depth {
            break;
        }
        let next_count = level.len().saturating_mul(base.len());
        if used.saturating_add(next_count) > b.max_products {
            partial = true;
            break;
        }
        used += next_count;
        let mut next: Vec<NonnegMatrix> = level
            .par_iter()
            .flat_map_iter(|a| base.iter().map(move |x| a.mul_unchecked(x)))
            .collect();
        next.sort_by(NonnegMatrix::lex_cmp);
        next.dedup_by(|x, y| x.lex_cmp(y).is_eq());
        if b.prune {
            next = prune_dominated(next);
        }
        level = next;
    }
    Ok(Enumeration { levels, partial })
}

fn measure(level: &[NonnegMatrix], depth: usize, needs: &Needs<'_>) -> Result<Level> {
    let per: Vec<(f64, Vec<f64>)> = level
        .par_iter()
        .map(|a| -> Result<(f64, Vec<f64>)> {
            let r = spectral_radius(a)?;
            let mut norms = Vec::with_capacity(1 + needs.weights.len());
            if needs.spectral_norm {
                norms.push(operator_norm(a)?);
            }
            if !needs.weights.is_empty() {
                let at = a.transpose();
                norms.extend(needs.weights.iter().map(|w| w.norm(a, &at)));
            }
            Ok((r, norms))
        })
        .collect::<Result<_>>()?;
    let max_radius = per.iter().map(|p| p.0).fold(0.0, f64::max);
    let n_norms = per.first().map_or(0, |p| p.1.len());
    let max_norm = (0..n_norms)
        .map(|k| per.iter().map(|p| p.1[k]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    if max_radius.is_nan() || max_norm.is_nan() {
        return Err(Error::NumericalFailure("NaN in product enumeration".into()));
    }
    Ok(Level { depth, max_radius, max_norm })
}

/// Drops every product that is entrywise dominated by a different product
/// of the same length. Sound for both sides of the bracket: the order is
/// preserved under multiplication by nonnegative matrices and `r` and every
/// monotone norm respect it, so a dominated product never attains a level
/// maximum at any extension.
fn prune_dominated(level: Vec<NonnegMatrix>) -> Vec<NonnegMatrix> {
    if level.len() < 2 || level.len() > PRUNE_LIMIT {
        return level;
    }
    // a dominator has a strictly larger entry sum, so it is visited first
    let mut keyed: Vec<(f64, usize)> = level
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_slice().iter().sum::<f64>(), i))
        .collect();
    keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut kept: Vec<usize> = Vec::new();
    for &(_, i) in &keyed {
        let a = &level[i];
        if !kept.iter().any(|&k| a.le_entrywise(&level[k])) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    let mut slots: Vec<Option<NonnegMatrix>> = level.into_iter().map(Some).collect();
    kept.into_iter().filter_map(|i| slots[i].take()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> NonnegMatrix {
        NonnegMatrix::from_rows(rows).unwrap()
    }

    fn shift_pair() -> MatrixSet {
        MatrixSet::new(vec![NonnegMatrix::unit(2, 0, 1), NonnegMatrix::unit(2, 1, 0)]).unwrap()
    }

    #[test]
    fn shift_pair_bracket() {
        let b = EnumerationBudget::with_depth(2);
        let lo = gsr_lower_bound(&shift_pair(), &b).unwrap();
        assert_eq!(lo.value, 1.0);
        let up = jsr_upper_bound(&shift_pair(), &EnumerationBudget::with_depth(1)).unwrap();
        assert!((up.value - 1.0).abs() < 1e-15);
        let br = radius_bracket(&shift_pair(), RadiusKind::Joint, &b).unwrap();
        assert_eq!(br.lower, 1.0);
        assert!((br.upper - 1.0).abs() < 1e-15);
        assert_eq!(br.depth_used, 2);
        assert!(!br.partial);
    }

    #[test]
    fn scalar_multiples_of_identity() {
        let s = MatrixSet::new(vec![
            NonnegMatrix::diag(&[2.0, 2.0]).unwrap(),
            NonnegMatrix::diag(&[3.0, 3.0]).unwrap(),
        ])
        .unwrap();
        let b = EnumerationBudget::with_depth(3);
        assert!((gsr_lower_bound(&s, &b).unwrap().value - 3.0).abs() < 1e-14);
        assert!((jsr_upper_bound(&s, &b).unwrap().value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn antidiagonal_singleton_and_zero() {
        let s = MatrixSet::singleton(m(&[&[0.0, 1.0], &[4.0, 0.0]]));
        let br = radius_bracket(&s, RadiusKind::Generalized, &EnumerationBudget::with_depth(2)).unwrap();
        assert!((br.lower - 2.0).abs() < 1e-14 && (br.upper - 2.0).abs() < 1e-14);
        let z = MatrixSet::singleton(NonnegMatrix::zeros(3));
        let br = radius_bracket(&z, RadiusKind::Joint, &EnumerationBudget::default()).unwrap();
        assert_eq!((br.lower, br.upper), (0.0, 0.0));
    }

    #[test]
    fn jordan_block_spectral_norm_bound_decreases() {
        let a = MatrixSet::singleton(m(&[&[1.0, 1.0], &[0.0, 1.0]]));
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let d1 = jsr_upper_bound(&a, &EnumerationBudget::with_depth(1)).unwrap().value;
        assert!((d1 - golden).abs() < 1e-12);
        let d8 = jsr_upper_bound(&a, &EnumerationBudget::with_depth(8)).unwrap().value;
        assert!(d8 < d1);
        assert!(d8 >= 1.0);
    }

    #[test]
    fn compare_examples() {
        let e = |l, u| Interval { lower: l, upper: u, partial: false };
        assert_eq!(compare_rho(&e(1.0, 1.0), &e(1.0, 1.0), 1e-9), Comparison::Consistent);
        assert_eq!(compare_rho(&e(2.0, 2.0), &e(1.0, 1.0), 1e-9), Comparison::Violation);
        assert_eq!(compare_rho(&e(0.9, 1.5), &e(1.0, 1.2), 1e-9), Comparison::Consistent);
        let g = RadiusBracket { lower: 1.0, upper: 1.0, depth_used: 1, functional: RadiusKind::Generalized, partial: false };
        let j = RadiusBracket { functional: RadiusKind::Joint, ..g };
        assert!(compare_brackets(&g, &j, 1e-9).is_err());
        assert_eq!(compare_brackets(&g, &g, 1e-9).unwrap(), Comparison::Consistent);
    }

    #[test]
    fn budget_overflow_is_partial() {
        let s = MatrixSet::new(vec![
            m(&[&[1.0, 2.0], &[0.0, 1.0]]),
            m(&[&[1.0, 0.0], &[3.0, 1.0]]),
            m(&[&[0.5, 1.0], &[1.0, 0.5]]),
        ])
        .unwrap();
        let b = EnumerationBudget { max_depth: 8, max_products: 20, prune: false };
        let br = radius_bracket(&s, RadiusKind::Joint, &b).unwrap();
        assert!(br.partial);
        assert_eq!(br.depth_used, 2);
        assert!(br.lower <= br.upper);
    }

    #[test]
    fn invalid_budget() {
        let b = EnumerationBudget { max_depth: 0, ..Default::default() };
        assert!(gsr_lower_bound(&shift_pair(), &b).is_err());
        let b = EnumerationBudget { max_products: 1, ..Default::default() };
        assert!(gsr_lower_bound(&shift_pair(), &b).is_err());
    }

    #[test]
    fn pruning_keeps_maximal_elements() {
        let a = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let b = m(&[&[0.5, 1.0], &[0.0, 1.0]]);
        let c = m(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let kept = prune_dominated(vec![a.clone(), b, c.clone()]);
        assert_eq!(kept, vec![a, c]);
    }
}
