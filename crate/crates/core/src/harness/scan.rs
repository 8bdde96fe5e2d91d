//! Alpha scans of the symmetrized functionals
//!
//! * `rho_n(a)   = sqrt(rho(S_a(P_1)...S_a(P_n)) * rho(S_a(P_n)...S_a(P_1)))`
//! * `rho~_n(a)  = rho(S_a(P_1) + ... + S_a(P_n))`
//! * `rho-_n(a)` = `rho_n` with each factor replaced by a row sum
//!   `S_a(P_i1) + ... + S_a(P_im)`, bounded above by the same expression with
//!   unsymmetrized rows.
//!
//! Each is claimed decreasing on `[0, 1/2]` and increasing on `[1/2, 1]`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Rho;
use super::eval::{eval_set, judge, relative_margin, Outcome, Tolerances};
use crate::error::{invalid, Result};
use crate::hadamard::AlphaValue;
use crate::jsr::{EnumerationBudget, Interval};
use crate::set::{MatrixSet, SetAlgebra};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub alpha_steps: usize,
    pub tol: f64,
    pub bracket_tol: f64,
    pub budget: EnumerationBudget,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { alpha_steps: 21, tol: 1e-9, bracket_tol: 1e-7, budget: EnumerationBudget::default() }
    }
}

impl ScanConfig {
    fn tolerances(&self) -> Tolerances {
        Tolerances { exact: self.tol, bracket: self.bracket_tol }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVariant {
    RhoN,
    RhoTildeN,
    RhoBarN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveVerdict {
    MonotoneOk,
    Violation,
    /// No violation, but some comparison involved a partial bracket.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCurve {
    pub variant: ScanVariant,
    pub rho: Rho,
    pub alphas: Vec<f64>,
    pub values: Vec<Interval>,
    /// Outcome of the monotonicity claim between grid points `i` and `i + 1`.
    pub pair_outcomes: Vec<Outcome>,
    /// Smallest relative margin over the adjacent pairs.
    pub min_pair_margin: f64,
    pub verdict: CurveVerdict,
    pub min_at_half: bool,
    /// The alpha-free upper bound (row-sum variant only).
    pub bound: Option<Interval>,
    /// Outcome of `value(alpha) <= bound` per grid point.
    pub bound_outcomes: Vec<Outcome>,
}

/// `i / (steps - 1)` for `i = 0..steps`, with `1/2` inserted when missing.
pub fn alpha_grid(steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(invalid("alpha grid needs at least 2 points"));
    }
    let last = (steps - 1) as f64;
    let mut grid: Vec<f64> = (0..steps).map(|i| i as f64 / last).collect();
    if !grid.contains(&0.5) {
        grid.push(0.5);
        grid.sort_by(f64::total_cmp);
    }
    Ok(grid)
}

fn symmetrized_chain_value(
    alg: &SetAlgebra,
    factors: &[MatrixSet],
    rho: Rho,
    budget: &EnumerationBudget,
) -> Result<Interval> {
    let fwd: Vec<&MatrixSet> = factors.iter().collect();
    let rev: Vec<&MatrixSet> = factors.iter().rev().collect();
    let p = alg.product_chain(&fwd)?;
    let vp = eval_set(&p, rho, budget)?;
    if factors.len() == 1 {
        return Ok(vp);
    }
    let q = alg.product_chain(&rev)?;
    if q == p {
        return Ok(vp);
    }
    Ok((vp * eval_set(&q, rho, budget)?).sqrt())
}

enum ScanInput<'a> {
    Sets(&'a [MatrixSet]),
    Grid(&'a [Vec<MatrixSet>]),
}

fn value_at(
    variant: ScanVariant,
    input: &ScanInput<'_>,
    rho: Rho,
    alpha: AlphaValue,
    budget: &EnumerationBudget,
) -> Result<Interval> {
    let alg = SetAlgebra::default();
    match (variant, input) {
        (ScanVariant::RhoN, ScanInput::Sets(sets)) => {
            let syms = sets.iter().map(|s| alg.symmetrize(s, alpha)).collect::<Result<Vec<_>>>()?;
            symmetrized_chain_value(&alg, &syms, rho, budget)
        }
        (ScanVariant::RhoTildeN, ScanInput::Sets(sets)) => {
            let syms = sets.iter().map(|s| alg.symmetrize(s, alpha)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&MatrixSet> = syms.iter().collect();
            eval_set(&alg.sum(&refs)?, rho, budget)
        }
        (ScanVariant::RhoBarN, ScanInput::Grid(grid)) => {
            let rows = grid
                .iter()
                .map(|row| {
                    let syms = row.iter().map(|s| alg.symmetrize(s, alpha)).collect::<Result<Vec<_>>>()?;
                    alg.sum(&syms.iter().collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()?;
            symmetrized_chain_value(&alg, &rows, rho, budget)
        }
        _ => Err(invalid("scan variant does not match its input shape")),
    }
}

fn row_sum_bound(grid: &[Vec<MatrixSet>], rho: Rho, budget: &EnumerationBudget) -> Result<Interval> {
    let alg = SetAlgebra::default();
    let rows = grid
        .iter()
        .map(|row| alg.sum(&row.iter().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    symmetrized_chain_value(&alg, &rows, rho, budget)
}

fn check_shape(sets: &[MatrixSet]) -> Result<()> {
    let first = sets.first().ok_or_else(|| invalid("scan needs at least one set"))?;
    if let Some(bad) = sets.iter().find(|s| s.dim() != first.dim()) {
        return Err(crate::Error::DimensionMismatch { expected: first.dim(), found: bad.dim() });
    }
    Ok(())
}

fn run_scan(
    variant: ScanVariant,
    input: ScanInput<'_>,
    rho: Rho,
    cfg: &ScanConfig,
    bound: Option<Interval>,
) -> Result<AlphaCurve> {
    let tol = cfg.tolerances();
    let alphas = alpha_grid(cfg.alpha_steps)?;
    let values = alphas
        .par_iter()
        .map(|&a| value_at(variant, &input, rho, AlphaValue::new(a)?, &cfg.budget))
        .collect::<Result<Vec<_>>>()?;

    let mut pair_outcomes = Vec::with_capacity(alphas.len() - 1);
    let mut min_pair_margin = f64::INFINITY;
    for i in 0..alphas.len() - 1 {
        // decreasing up to 1/2, increasing after; 1/2 is a grid point
        let (lhs, rhs) = if alphas[i + 1] <= 0.5 {
            (&values[i + 1], &values[i])
        } else {
            (&values[i], &values[i + 1])
        };
        pair_outcomes.push(judge(lhs, rhs, tol));
        min_pair_margin = min_pair_margin.min(relative_margin(lhs, rhs));
    }
    let half = alphas.iter().position(|&a| a == 0.5).expect("grid contains 1/2");
    let min_at_half = values
        .iter()
        .all(|v| judge(&values[half], v, tol) != Outcome::Violation);
    let bound_outcomes = match &bound {
        Some(b) => values.iter().map(|v| judge(v, b, tol)).collect(),
        None => Vec::new(),
    };
    let worst = pair_outcomes
        .iter()
        .chain(&bound_outcomes)
        .fold(Outcome::Pass, |acc, o| acc.worst(*o));
    let verdict = match worst {
        _ if !min_at_half => CurveVerdict::Violation,
        Outcome::Violation => CurveVerdict::Violation,
        Outcome::Pass => CurveVerdict::MonotoneOk,
        _ => CurveVerdict::Inconclusive,
    };
    Ok(AlphaCurve {
        variant,
        rho,
        alphas,
        values,
        pair_outcomes,
        min_pair_margin,
        verdict,
        min_at_half,
        bound,
        bound_outcomes,
    })
}

pub fn scan_rho_n(sets: &[MatrixSet], rho: Rho, cfg: &ScanConfig) -> Result<AlphaCurve> {
    check_shape(sets)?;
    run_scan(ScanVariant::RhoN, ScanInput::Sets(sets), rho, cfg, None)
}

pub fn scan_rho_tilde_n(sets: &[MatrixSet], rho: Rho, cfg: &ScanConfig) -> Result<AlphaCurve> {
    check_shape(sets)?;
    run_scan(ScanVariant::RhoTildeN, ScanInput::Sets(sets), rho, cfg, None)
}

/// `grid[i]` holds the summands of the `i`-th product factor.
pub fn scan_rho_bar_n(grid: &[Vec<MatrixSet>], rho: Rho, cfg: &ScanConfig) -> Result<AlphaCurve> {
    if grid.is_empty() || grid.iter().any(Vec::is_empty) {
        return Err(invalid("row-sum scan needs a nonempty grid with nonempty rows"));
    }
    check_shape(&grid.concat())?;
    let bound = row_sum_bound(grid, rho, &cfg.budget)?;
    run_scan(ScanVariant::RhoBarN, ScanInput::Grid(grid), rho, cfg, Some(bound))
}

impl AlphaCurve {
    fn segment(alpha: f64) -> &'static str {
        if alpha < 0.5 {
            "decreasing"
        } else if alpha > 0.5 {
            "increasing"
        } else {
            "minimum"
        }
    }

    fn row_outcome(&self, i: usize) -> Outcome {
        let a = self.alphas[i];
        let pair = if a < 0.5 {
            self.pair_outcomes[i]
        } else if a > 0.5 {
            self.pair_outcomes[i - 1]
        } else if self.min_at_half {
            Outcome::Pass
        } else {
            Outcome::Violation
        };
        match self.bound_outcomes.get(i) {
            Some(b) => pair.worst(*b),
            None => pair,
        }
    }

    /// `alpha,lower,upper,exact,segment,verdict`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,lower,upper,exact,segment,verdict\n");
        for (i, (a, v)) in self.alphas.iter().zip(&self.values).enumerate() {
            writeln!(
                out,
                "{a:.16e},{:.16e},{:.16e},{},{},{}",
                v.lower,
                v.upper,
                v.is_exact(),
                Self::segment(*a),
                self.row_outcome(i).as_str()
            )
            .expect("writing to a String");
        }
        out
    }
}
