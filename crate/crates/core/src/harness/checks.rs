//! Per-trial checks. Each returns the tested links; aggregation into a
//! report happens in [`super::verify`].

use serde::{Deserialize, Serialize};

use super::config::{Rho, TheoremId, TrialConfig};
use super::eval::{claim, eval_matrix, eval_set, weighted_product, LinkResult, Outcome, Tolerances};
use super::instance::Instance;
use super::scan::{scan_rho_bar_n, scan_rho_n, scan_rho_tilde_n, AlphaCurve, CurveVerdict};
use crate::error::{invalid, Result};
use crate::hadamard::{weighted_geometric_mean, AlphaValue, WeightRegime, WeightVector};
use crate::jsr::{EnumerationBudget, Interval};
use crate::matrix::NonnegMatrix;
use crate::set::{MatrixSet, MeanMode, SetAlgebra};

/// Membership tolerance for set inclusion checks.
pub const INCLUSION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct CheckContext<'a> {
    pub rhos: &'a [Rho],
    pub tol: Tolerances,
    pub budget: EnumerationBudget,
}

impl<'a> CheckContext<'a> {
    pub fn new(cfg: &TrialConfig, rhos: &'a [Rho]) -> Self {
        Self {
            rhos,
            tol: Tolerances { exact: cfg.tol, bracket: cfg.bracket_tol },
            budget: cfg.budget,
        }
    }

    fn set(&self, s: &MatrixSet, rho: Rho) -> Result<Interval> {
        eval_set(s, rho, &self.budget)
    }
}

fn matrix_product(chain: &[&NonnegMatrix]) -> Result<NonnegMatrix> {
    let (first, rest) = chain.split_first().ok_or_else(|| invalid("empty product"))?;
    rest.iter().try_fold((*first).clone(), |acc, m| acc.matmul(m))
}

fn entrywise_link(label: &str, lhs: &NonnegMatrix, rhs: &NonnegMatrix, tol: f64) -> Result<LinkResult> {
    let excess = lhs.entrywise_excess(rhs)?;
    Ok(LinkResult {
        label: label.to_owned(),
        rho: None,
        lhs: Interval::exact(excess),
        rhs: Interval::exact(0.0),
        margin: -excess,
        outcome: if excess > tol { Outcome::Violation } else { Outcome::Pass },
        soft: false,
    })
}

fn mean_mode(w: &WeightVector) -> MeanMode {
    match w.regime() {
        WeightRegime::UnitSum => MeanMode::UnitSum,
        WeightRegime::GeOneSum => MeanMode::Matrix,
    }
}

/// Weighted-mean inequality on single matrices (`Factors`) and the
/// mean-of-products chain on a matrix grid (`Grid`).
pub fn check_weighted_mean(inst: &Instance, ctx: &CheckContext<'_>) -> Result<Vec<LinkResult>> {
    let mut links = Vec::new();
    match inst {
        Instance::Factors { factors, weights } => {
            let mean = weighted_geometric_mean(factors, weights)?;
            for &rho in ctx.rhos {
                let lhs = Interval::exact(eval_matrix(&mean, rho)?);
                let vals = factors
                    .iter()
                    .map(|k| eval_matrix(k, rho).map(Interval::exact))
                    .collect::<Result<Vec<_>>>()?;
                let rhs = weighted_product(&vals, weights.weights());
                links.push(claim("rho(mean) <= prod rho(K_j)^a_j", Some(rho), lhs, rhs, ctx.tol));
            }
        }
        Instance::Grid { grid, weights } => {
            let (k_rows, m_cols) = grid_shape(grid, weights)?;
            let means = grid
                .iter()
                .map(|row| weighted_geometric_mean(row, weights))
                .collect::<Result<Vec<_>>>()?;
            let k = matrix_product(&means.iter().collect::<Vec<_>>())?;
            let cols = (0..m_cols)
                .map(|j| matrix_product(&(0..k_rows).map(|i| &grid[i][j]).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            let middle = weighted_geometric_mean(&cols, weights)?;
            links.push(entrywise_link("K <= middle (entrywise)", &k, &middle, ctx.tol.exact)?);
            for &rho in ctx.rhos {
                let lhs = Interval::exact(eval_matrix(&k, rho)?);
                let mid = Interval::exact(eval_matrix(&middle, rho)?);
                let vals = cols
                    .iter()
                    .map(|c| eval_matrix(c, rho).map(Interval::exact))
                    .collect::<Result<Vec<_>>>()?;
                let rhs = weighted_product(&vals, weights.weights());
                links.push(claim("rho(K) <= rho(middle)", Some(rho), lhs, mid, ctx.tol));
                links.push(claim("rho(middle) <= prod rho(column)^a_j", Some(rho), mid, rhs, ctx.tol));
            }
        }
        _ => return Err(invalid("weighted-mean check needs a factor list or a matrix grid")),
    }
    Ok(links)
}

fn refs(row: &[MatrixSet]) -> Vec<&MatrixSet> {
    row.iter().collect()
}

fn grid_shape<T>(grid: &[Vec<T>], weights: &WeightVector) -> Result<(usize, usize)> {
    let k = grid.len();
    let m = grid.first().map_or(0, Vec::len);
    if k == 0 || m == 0 || grid.iter().any(|r| r.len() != m) {
        return Err(invalid("grid must be rectangular and nonempty"));
    }
    if m != weights.len() {
        return Err(invalid(format!("grid has {m} columns but {} weights", weights.len())));
    }
    Ok((k, m))
}

/// Set versions of the products chain (`SetMeanProd`) and the sums chain
/// (`SetMeanSum`). `grid[i][j]`: `i` indexes products/summands, `j` means.
pub fn check_set_mean(theorem: TheoremId, inst: &Instance, ctx: &CheckContext<'_>) -> Result<Vec<LinkResult>> {
    let Instance::SetGrid { grid, weights } = inst else {
        return Err(invalid("set-mean check needs a grid of sets"));
    };
    let (k_rows, m_cols) = grid_shape(grid, weights)?;
    let alg = SetAlgebra::default();
    let mode = mean_mode(weights);
    let means = grid
        .iter()
        .map(|row| alg.hadamard_mean(&row.iter().collect::<Vec<_>>(), weights, mode))
        .collect::<Result<Vec<_>>>()?;
    let mean_refs: Vec<&MatrixSet> = means.iter().collect();
    let combine = |sets: &[&MatrixSet]| match theorem {
        TheoremId::SetMeanProd => alg.product_chain(sets),
        _ => alg.sum(sets),
    };
    let lhs_set = combine(&mean_refs)?;
    let cols = (0..m_cols)
        .map(|j| combine(&(0..k_rows).map(|i| &grid[i][j]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let middle = alg.hadamard_mean(&cols.iter().collect::<Vec<_>>(), weights, mode)?;

    let (l1, l2) = match theorem {
        TheoremId::SetMeanProd => ("rho(K) <= rho(middle)", "rho(middle) <= prod rho(column)^a_j"),
        _ => ("rho(sum of means) <= rho(mean of sums)", "rho(mean of sums) <= prod rho(column sum)^a_j"),
    };
    let mut links = Vec::new();
    for &rho in ctx.rhos {
        let lhs = ctx.set(&lhs_set, rho)?;
        let mid = ctx.set(&middle, rho)?;
        let vals = cols.iter().map(|c| ctx.set(c, rho)).collect::<Result<Vec<_>>>()?;
        let rhs = weighted_product(&vals, weights.weights());
        links.push(claim(l1, Some(rho), lhs, mid, ctx.tol));
        links.push(claim(l2, Some(rho), mid, rhs, ctx.tol));
    }
    Ok(links)
}

/// Symmetrization chains: products (`SymChainProd`), sums (`SymChainSum`)
/// and the single-set inequality (`SymSingle`).
pub fn check_symmetrization_chain(
    theorem: TheoremId,
    inst: &Instance,
    ctx: &CheckContext<'_>,
) -> Result<Vec<LinkResult>> {
    let Instance::Sets { sets, alpha } = inst else {
        return Err(invalid("symmetrization check needs a list of sets and alpha"));
    };
    if sets.is_empty() {
        return Err(invalid("symmetrization check needs at least one set"));
    }
    let alg = SetAlgebra::default();
    let a = *alpha;
    let syms = sets.iter().map(|s| alg.symmetrize(s, a)).collect::<Result<Vec<_>>>()?;
    let sym_refs: Vec<&MatrixSet> = syms.iter().collect();
    let set_refs: Vec<&MatrixSet> = sets.iter().collect();
    let mut links = Vec::new();
    match theorem {
        TheoremId::SymChainProd => {
            let lhs_set = alg.product_chain(&sym_refs)?;
            let p = alg.product_chain(&set_refs)?;
            let rev: Vec<&MatrixSet> = sets.iter().rev().collect();
            let q = alg.product_chain(&rev)?;
            let middle = alg.hadamard_pair(&p, &q.adjoint(), a)?;
            for &rho in ctx.rhos {
                let lhs = ctx.set(&lhs_set, rho)?;
                let mid = ctx.set(&middle, rho)?;
                let vp = ctx.set(&p, rho)?;
                let vq = if q == p { vp } else { ctx.set(&q, rho)? };
                let rhs = vp.powf(a.get()) * vq.powf(1.0 - a.get());
                links.push(claim("rho(prod S_a) <= rho(middle)", Some(rho), lhs, mid, ctx.tol));
                links.push(claim(
                    "rho(middle) <= rho(forward)^a rho(reverse)^(1-a)",
                    Some(rho),
                    mid,
                    rhs,
                    ctx.tol,
                ));
            }
        }
        TheoremId::SymChainSum => {
            let lhs_set = alg.sum(&sym_refs)?;
            let total = alg.sum(&set_refs)?;
            let middle = alg.symmetrize(&total, a)?;
            for &rho in ctx.rhos {
                let lhs = ctx.set(&lhs_set, rho)?;
                let mid = ctx.set(&middle, rho)?;
                let rhs = ctx.set(&total, rho)?;
                links.push(claim("rho(sum S_a) <= rho(S_a(sum))", Some(rho), lhs, mid, ctx.tol));
                links.push(claim("rho(S_a(sum)) <= rho(sum)", Some(rho), mid, rhs, ctx.tol));
            }
        }
        TheoremId::SymSingle => {
            for (s, sym) in sets.iter().zip(&syms) {
                for &rho in ctx.rhos {
                    let lhs = ctx.set(sym, rho)?;
                    let rhs = ctx.set(s, rho)?;
                    links.push(claim("rho(S_a(P)) <= rho(P)", Some(rho), lhs, rhs, ctx.tol));
                }
            }
        }
        other => return Err(invalid(format!("{other} is not a symmetrization chain"))),
    }
    Ok(links)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InclusionBranch {
    /// `0 <= a1 < a2 <= 1/2`: `S_a2(P) subset S_a(S_a1(P))`.
    Lower,
    /// `1/2 <= a1 < a2 <= 1`: `S_a1(P) subset S_a(S_a2(P))`.
    Upper,
    /// `a1 = a2`, nothing to check.
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionCheck {
    pub branch: InclusionBranch,
    pub alpha: Option<f64>,
    /// Elements of the smaller set with no match in the larger one.
    pub missing: usize,
    pub checked: usize,
    pub included: bool,
}

/// The parameter `a` of the inclusion, with its branch. Pairs straddling
/// `1/2` and decreasing pairs are rejected.
pub fn inclusion_alpha(a1: AlphaValue, a2: AlphaValue) -> Result<(InclusionBranch, Option<f64>)> {
    let (x, y) = (a1.get(), a2.get());
    if x == y {
        return Ok((InclusionBranch::Trivial, None));
    }
    if x > y {
        return Err(invalid(format!("alpha pair must be increasing, got ({x}, {y})")));
    }
    if y <= 0.5 {
        Ok((InclusionBranch::Lower, Some((x + y - 1.0) / (2.0 * x - 1.0))))
    } else if x >= 0.5 {
        Ok((InclusionBranch::Upper, Some((x + y - 1.0) / (2.0 * y - 1.0))))
    } else {
        Err(invalid(format!("alpha pair ({x}, {y}) straddles 1/2")))
    }
}

pub fn check_alpha_inclusion(psi: &MatrixSet, a1: AlphaValue, a2: AlphaValue) -> Result<InclusionCheck> {
    let (branch, alpha) = inclusion_alpha(a1, a2)?;
    let Some(alpha) = alpha else {
        return Ok(InclusionCheck { branch, alpha: None, missing: 0, checked: 0, included: true });
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(crate::Error::NumericalFailure(format!("inclusion parameter {alpha} outside (0, 1)")));
    }
    let alg = SetAlgebra::default();
    let (inner, outer) = match branch {
        InclusionBranch::Lower => (a1, a2),
        _ => (a2, a1),
    };
    let small = alg.symmetrize(psi, outer)?;
    let big = alg.symmetrize(&alg.symmetrize(psi, inner)?, AlphaValue::new(alpha)?)?;
    let missing = small
        .iter()
        .filter(|e| !big.contains_approx(e, INCLUSION_TOL))
        .count();
    Ok(InclusionCheck { branch, alpha: Some(alpha), missing, checked: small.len(), included: missing == 0 })
}

fn inclusion_links(inst: &Instance) -> Result<Vec<LinkResult>> {
    let Instance::AlphaPair { set, a1, a2 } = inst else {
        return Err(invalid("inclusion check needs a set and an alpha pair"));
    };
    let c = check_alpha_inclusion(set, *a1, *a2)?;
    Ok(vec![LinkResult {
        label: format!("S_a2 subset S_a(S_a1) ({:?} branch)", c.branch).to_lowercase(),
        rho: None,
        lhs: Interval::exact(c.missing as f64),
        rhs: Interval::exact(0.0),
        margin: -(c.missing as f64),
        outcome: if c.included { Outcome::Pass } else { Outcome::Violation },
        soft: false,
    }])
}

/// Products of sums of pair means against products of pair means of sums,
/// and its symmetrized corollary.
pub fn check_sum_prod_lemma(inst: &Instance, ctx: &CheckContext<'_>) -> Result<Vec<LinkResult>> {
    let Instance::PairGrid { psi, sigma, alpha } = inst else {
        return Err(invalid("sum/product check needs two grids of sets and alpha"));
    };
    let m = psi.first().map_or(0, Vec::len);
    if psi.is_empty()
        || m == 0
        || psi.len() != sigma.len()
        || psi.iter().chain(sigma).any(|r| r.len() != m)
    {
        return Err(invalid("sum/product grids must be rectangular, nonempty and of equal shape"));
    }
    let alg = SetAlgebra::default();
    let a = *alpha;

    let mut lhs_rows = Vec::with_capacity(psi.len());
    let mut rhs_rows = Vec::with_capacity(psi.len());
    let mut sym_lhs_rows = Vec::with_capacity(psi.len());
    let mut sym_rhs_rows = Vec::with_capacity(psi.len());
    for (prow, srow) in psi.iter().zip(sigma) {
        let pairs = prow
            .iter()
            .zip(srow)
            .map(|(p, s)| alg.hadamard_pair(p, s, a))
            .collect::<Result<Vec<_>>>()?;
        lhs_rows.push(alg.sum(&refs(&pairs))?);
        let (psum, ssum) = (alg.sum(&refs(prow))?, alg.sum(&refs(srow))?);
        rhs_rows.push(alg.hadamard_pair(&psum, &ssum, a)?);
        let syms = prow.iter().map(|p| alg.symmetrize(p, a)).collect::<Result<Vec<_>>>()?;
        sym_lhs_rows.push(alg.sum(&refs(&syms))?);
        sym_rhs_rows.push(alg.symmetrize(&psum, a)?);
    }
    let lemma_l = alg.product_chain(&refs(&lhs_rows))?;
    let lemma_r = alg.product_chain(&refs(&rhs_rows))?;
    let cor_l = alg.product_chain(&refs(&sym_lhs_rows))?;
    let cor_r = alg.product_chain(&refs(&sym_rhs_rows))?;
    let mut links = Vec::new();
    for &rho in ctx.rhos {
        links.push(claim(
            "rho(prod sum pair means) <= rho(prod pair mean of sums)",
            Some(rho),
            ctx.set(&lemma_l, rho)?,
            ctx.set(&lemma_r, rho)?,
            ctx.tol,
        ));
        links.push(claim(
            "rho(prod sum S_a) <= rho(prod S_a(sum))",
            Some(rho),
            ctx.set(&cor_l, rho)?,
            ctx.set(&cor_r, rho)?,
            ctx.tol,
        ));
    }
    Ok(links)
}

/// Runs the scan for each functional and summarizes each curve as links.
pub fn check_scan(theorem: TheoremId, inst: &Instance, cfg: &TrialConfig, rhos: &[Rho]) -> Result<(Vec<LinkResult>, Vec<AlphaCurve>)> {
    let scfg = cfg.scan_config();
    let mut curves = Vec::new();
    for &rho in rhos {
        curves.push(match (theorem, inst) {
            (TheoremId::RhoN, Instance::ScanSets { sets }) => scan_rho_n(sets, rho, &scfg)?,
            (TheoremId::RhoTildeN, Instance::ScanSets { sets }) => scan_rho_tilde_n(sets, rho, &scfg)?,
            (TheoremId::RhoBarN, Instance::ScanGrid { grid }) => scan_rho_bar_n(grid, rho, &scfg)?,
            _ => return Err(invalid(format!("{theorem} scan got a mismatched instance"))),
        });
    }
    let links = curves.iter().flat_map(curve_links).collect();
    Ok((links, curves))
}

fn curve_links(c: &AlphaCurve) -> Vec<LinkResult> {
    let mono = c.pair_outcomes.iter().fold(Outcome::Pass, |acc, o| acc.worst(*o));
    let half = c.alphas.iter().position(|&a| a == 0.5).unwrap_or(0);
    let lowest = c
        .values
        .iter()
        .copied()
        .min_by(|a, b| a.upper.total_cmp(&b.upper))
        .unwrap_or(Interval::exact(0.0));
    let mut links = vec![
        LinkResult {
            label: "monotone on [0,1/2] and [1/2,1]".into(),
            rho: Some(c.rho),
            lhs: Interval::exact(0.0),
            rhs: Interval::exact(0.0),
            margin: c.min_pair_margin,
            outcome: mono,
            soft: false,
        },
        LinkResult {
            label: "value(1/2) <= value(a)".into(),
            rho: Some(c.rho),
            lhs: c.values[half],
            rhs: lowest,
            margin: super::eval::relative_margin(&c.values[half], &lowest),
            outcome: if c.min_at_half { Outcome::Pass } else { Outcome::Violation },
            soft: false,
        },
    ];
    if let Some(bound) = c.bound {
        let highest = c
            .values
            .iter()
            .copied()
            .max_by(|a, b| a.lower.total_cmp(&b.lower))
            .unwrap_or(Interval::exact(0.0));
        let worst = c.bound_outcomes.iter().fold(Outcome::Pass, |acc, o| acc.worst(*o));
        links.push(LinkResult {
            label: "value(a) <= unsymmetrized bound".into(),
            rho: Some(c.rho),
            lhs: highest,
            rhs: bound,
            margin: super::eval::relative_margin(&highest, &bound),
            outcome: worst,
            soft: false,
        });
    }
    debug_assert!(c.verdict != CurveVerdict::MonotoneOk || links.iter().all(|l| l.outcome == Outcome::Pass));
    links
}

/// Weighted-mean inequality with weights summing to at least one. Failures
/// for `w` are findings; failures for the other functionals are violations.
pub fn check_w_search(inst: &Instance, ctx: &CheckContext<'_>) -> Result<Vec<LinkResult>> {
    let mut links = check_weighted_mean(inst, ctx)?;
    for l in &mut links {
        l.soft = l.rho == Some(Rho::W);
    }
    Ok(links)
}

/// Dispatches to the check for `theorem`.
pub fn run_checks(
    theorem: TheoremId,
    inst: &Instance,
    cfg: &TrialConfig,
    rhos: &[Rho],
) -> Result<(Vec<LinkResult>, Vec<AlphaCurve>)> {
    let ctx = CheckContext::new(cfg, rhos);
    let links = match theorem {
        TheoremId::EjsMean | TheoremId::MeanOfProducts => check_weighted_mean(inst, &ctx)?,
        TheoremId::SetMeanProd | TheoremId::SetMeanSum => check_set_mean(theorem, inst, &ctx)?,
        TheoremId::SymChainProd | TheoremId::SymChainSum | TheoremId::SymSingle => {
            check_symmetrization_chain(theorem, inst, &ctx)?
        }
        TheoremId::AlphaInclusion => inclusion_links(inst)?,
        TheoremId::SumProdLemma => check_sum_prod_lemma(inst, &ctx)?,
        TheoremId::RhoN | TheoremId::RhoTildeN | TheoremId::RhoBarN => {
            return check_scan(theorem, inst, cfg, rhos)
        }
        TheoremId::WCounterexampleSearch => check_w_search(inst, &ctx)?,
    };
    Ok((links, Vec::new()))
}
