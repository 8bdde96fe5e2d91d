//! Midpoint-rule discretization of nonnegative integral kernels on `[0,1]^2`.
//!
//! The operator `(Kf)(x) = int k(x,y) f(y) dy` becomes the matrix
//! `M_ij = h k(x_i, x_j)` with nodes `x_i = (i - 1/2) h`, `h = 1/N`. For weights
//! summing to one the factor `h` passes through Hadamard means unchanged, so
//! `S_a` of the matrix is the matrix of `S_a` of the kernel.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hadamard::{symmetrize_alpha, weighted_geometric_mean, AlphaValue, WeightVector};
use crate::harness::eval::{claim, eval_matrix, weighted_product, Outcome, Tolerances};
use crate::harness::{alpha_grid, scan_rho_n, CurveVerdict, Rho, ScanConfig, TheoremId};
use crate::jsr::Interval;
use crate::matrix::NonnegMatrix;
use crate::set::MatrixSet;

/// Factor functions for rank-one kernels `u(x) v(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogFn {
    One,
    X,
    Exp,
    ExpNeg,
}

impl CatalogFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            CatalogFn::One => 1.0,
            CatalogFn::X => x,
            CatalogFn::Exp => x.exp(),
            CatalogFn::ExpNeg => (-x).exp(),
        }
    }
}

impl FromStr for CatalogFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(CatalogFn::One),
            "x" => Ok(CatalogFn::X),
            "exp" => Ok(CatalogFn::Exp),
            "exp-neg" => Ok(CatalogFn::ExpNeg),
            _ => Err(invalid(format!("unknown catalog function '{s}' (one, x, exp, exp-neg)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum KernelSpec {
    /// `k = c`.
    Constant { c: f64 },
    /// `k = exp(c (x - y))`.
    ExpDiff { c: f64 },
    /// `k = u(x) v(y)`.
    RankOne { u: CatalogFn, v: CatalogFn },
    /// `k = x^a + y^b`.
    Poly { a: f64, b: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let params: &[f64] = match self {
            KernelSpec::Constant { c } => {
                if *c < 0.0 {
                    return Err(invalid(format!("constant kernel {c} is negative")));
                }
                &[*c]
            }
            KernelSpec::ExpDiff { c } => &[*c],
            KernelSpec::RankOne { .. } => &[],
            KernelSpec::Poly { a, b } => {
                if *a < 0.0 || *b < 0.0 {
                    return Err(invalid("polynomial kernel exponents must be >= 0"));
                }
                &[*a, *b]
            }
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(invalid("kernel parameters must be finite"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            KernelSpec::Constant { c } => c,
            KernelSpec::ExpDiff { c } => (c * (x - y)).exp(),
            KernelSpec::RankOne { u, v } => u.eval(x) * v.eval(y),
            KernelSpec::Poly { a, b } => x.powf(a) + y.powf(b),
        }
    }

    /// Parses `id` plus comma-separated parameters, e.g. `exp-diff` with
    /// `"1.5"`, or `rank-one` with `"exp,exp-neg"`. Missing parameters take
    /// the defaults `c = 1`, `u = exp, v = exp-neg`, `a = b = 1`.
    pub fn parse(id: &str, params: Option<&str>) -> Result<Self> {
        let parts: Vec<&str> = params
            .map(|p| p.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default();
        let num = |i: usize, default: f64| -> Result<f64> {
            parts.get(i).map_or(Ok(default), |s| {
                s.parse::<f64>().map_err(|_| invalid(format!("kernel parameter '{s}' is not a number")))
            })
        };
        let arity = |n: usize| -> Result<()> {
            if parts.len() > n {
                return Err(invalid(format!("kernel '{id}' takes at most {n} parameters")));
            }
            Ok(())
        };
        let spec = match id {
            "constant" => {
                arity(1)?;
                KernelSpec::Constant { c: num(0, 1.0)? }
            }
            "exp-diff" => {
                arity(1)?;
                KernelSpec::ExpDiff { c: num(0, 1.0)? }
            }
            "rank-one" => {
                arity(2)?;
                KernelSpec::RankOne {
                    u: parts.first().map_or(Ok(CatalogFn::Exp), |s| s.parse())?,
                    v: parts.get(1).map_or(Ok(CatalogFn::ExpNeg), |s| s.parse())?,
                }
            }
            "poly" => {
                arity(2)?;
                KernelSpec::Poly { a: num(0, 1.0)?, b: num(1, 1.0)? }
            }
            _ => return Err(invalid(format!("unknown kernel '{id}' (constant, exp-diff, rank-one, poly)"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Constant { c } => write!(f, "constant({c})"),
            KernelSpec::ExpDiff { c } => write!(f, "exp-diff({c})"),
            KernelSpec::RankOne { u, v } => write!(f, "rank-one({u:?},{v:?})"),
            KernelSpec::Poly { a, b } => write!(f, "poly({a},{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weight: f64,
    pub matrix: NonnegMatrix,
}

pub fn discretize(k: &KernelSpec, n: usize) -> Result<Discretization> {
    if n < 2 {
        return Err(invalid("grid size must be >= 2"));
    }
    k.validate()?;
    let h = 1.0 / n as f64;
    let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let mut data = Vec::with_capacity(n * n);
    for &x in &nodes {
        for &y in &nodes {
            data.push(h * k.eval(x, y));
        }
    }
    let matrix = NonnegMatrix::new(n, data)
        .map_err(|e| invalid(format!("kernel {k} is not a finite nonnegative kernel: {e}")))?;
    Ok(Discretization { n, nodes, weight: h, matrix })
}

/// `||S_a(K)||` for `k = exp(c (x - y))` on `L^2[0,1]`: the symmetrized
/// kernel is `exp(g x) exp(-g y)`, `g = c (2a - 1)`, so the norm is
/// `||exp(g .)|| ||exp(-g .)||`.
pub fn exp_diff_symmetrized_norm(c: f64, alpha: f64) -> f64 {
    let beta = 2.0 * c * (2.0 * alpha - 1.0);
    if beta == 0.0 {
        return 1.0;
    }
    // (e^b - 1)/b and (1 - e^-b)/b, cancellation-free near 0
    let up = beta.exp_m1() / beta;
    let down = -(-beta).exp_m1() / beta;
    (up * down).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementConfig {
    pub rho: Rho,
    pub alpha_steps: usize,
    pub tol: f64,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self { rho: Rho::R, alpha_steps: 21, tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub n: usize,
    pub outcome: Outcome,
    /// Smallest relative margin of the checked inequalities.
    pub margin: f64,
    /// The quantities compared, in a theorem-specific but N-independent order.
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub kernel: KernelSpec,
    pub theorem: TheoremId,
    pub config: RefinementConfig,
    pub rows: Vec<RefinementRow>,
    /// Largest difference of margins between any two grid sizes.
    pub margin_drift: f64,
    /// Largest difference of corresponding values between any two grid sizes.
    pub value_drift: f64,
    /// Whether every grid size reached the same outcome.
    pub outcomes_agree: bool,
}

fn refine_one(k: &KernelSpec, theorem: TheoremId, n: usize, cfg: &RefinementConfig) -> Result<RefinementRow> {
    let m = discretize(k, n)?.matrix;
    let tol = Tolerances { exact: cfg.tol, bracket: cfg.tol };
    match theorem {
        TheoremId::RhoN => {
            let scfg = ScanConfig { alpha_steps: cfg.alpha_steps, tol: cfg.tol, ..Default::default() };
            let curve = scan_rho_n(&[MatrixSet::singleton(m)], cfg.rho, &scfg)?;
            let outcome = match curve.verdict {
                CurveVerdict::MonotoneOk => Outcome::Pass,
                CurveVerdict::Violation => Outcome::Violation,
                CurveVerdict::Inconclusive => Outcome::Inconclusive,
            };
            Ok(RefinementRow {
                n,
                outcome,
                margin: curve.min_pair_margin,
                values: curve.values.iter().map(Interval::midpoint).collect(),
            })
        }
        TheoremId::EjsMean => {
            let w = WeightVector::unit(vec![1.0 / 3.0, 2.0 / 3.0])?;
            let factors = [m.clone(), m.transpose()];
            let mean = weighted_geometric_mean(&factors, &w)?;
            let lhs = Interval::exact(eval_matrix(&mean, cfg.rho)?);
            let vals = factors
                .iter()
                .map(|f| eval_matrix(f, cfg.rho).map(Interval::exact))
                .collect::<Result<Vec<_>>>()?;
            let rhs = weighted_product(&vals, w.weights());
            let link = claim("rho(mean) <= prod rho(K_j)^a_j", Some(cfg.rho), lhs, rhs, tol);
            Ok(RefinementRow { n, outcome: link.outcome, margin: link.margin, values: vec![lhs.lower, rhs.lower] })
        }
        TheoremId::SymSingle => {
            let base = Interval::exact(eval_matrix(&m, cfg.rho)?);
            let mut outcome = Outcome::Pass;
            let mut margin = f64::INFINITY;
            let mut values = Vec::new();
            for a in alpha_grid(cfg.alpha_steps)? {
                let s = symmetrize_alpha(&m, AlphaValue::new(a)?);
                let lhs = Interval::exact(eval_matrix(&s, cfg.rho)?);
                let link = claim("rho(S_a(K)) <= rho(K)", Some(cfg.rho), lhs, base, tol);
                outcome = outcome.worst(link.outcome);
                margin = margin.min(link.margin);
                values.push(lhs.lower);
            }
            values.push(base.lower);
            Ok(RefinementRow { n, outcome, margin, values })
        }
        other => Err(invalid(format!(
            "refinement study supports rho-n, ejs-mean and sym-single, not {other}"
        ))),
    }
}

/// Runs `theorem` on the discretized kernel at each grid size and measures
/// how much the margins and compared values move between sizes.
pub fn refinement_study(
    k: &KernelSpec,
    theorem: TheoremId,
    ns: &[usize],
    cfg: &RefinementConfig,
) -> Result<RefinementReport> {
    if ns.is_empty() {
        return Err(invalid("refinement study needs at least one grid size"));
    }
    let rows = ns
        .par_iter()
        .map(|&n| refine_one(k, theorem, n, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut margin_drift: f64 = 0.0;
    let mut value_drift: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            margin_drift = margin_drift.max((a.margin - b.margin).abs());
            for (x, y) in a.values.iter().zip(&b.values) {
                value_drift = value_drift.max((x - y).abs());
            }
        }
    }
    let outcomes_agree = rows.iter().all(|r| r.outcome == rows[0].outcome);
    Ok(RefinementReport {
        kernel: *k,
        theorem,
        config: *cfg,
        rows,
        margin_drift,
        value_drift,
        outcomes_agree,
    })
}
