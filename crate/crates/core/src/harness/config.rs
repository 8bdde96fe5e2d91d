use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hadamard::WeightRegime;
use crate::jsr::{EnumerationBudget, RadiusKind};

/// The inequality or monotonicity statement a trial exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    /// `rho(K_1^(a_1) o ... o K_m^(a_m)) <= prod rho(K_j)^(a_j)`.
    EjsMean,
    /// Products of Hadamard means against means of products (matrix grid).
    MeanOfProducts,
    /// Set version of the products chain.
    SetMeanProd,
    /// Set version of the sums chain.
    SetMeanSum,
    /// `rho(S_a(P_1)...S_a(P_n)) <= rho((P_1...P_n)^(a) o ((P_n...P_1)^*)^(1-a)) <= ...`.
    SymChainProd,
    /// `rho(sum S_a(P_i)) <= rho(S_a(sum P_i)) <= rho(sum P_i)`.
    SymChainSum,
    /// `rho(S_a(P)) <= rho(P)`.
    SymSingle,
    /// `S_a2(P) subset S_a(S_a1(P))` for the matching `a`.
    AlphaInclusion,
    /// Products of sums of Hadamard means against products of means of sums.
    SumProdLemma,
    RhoN,
    RhoTildeN,
    RhoBarN,
    /// Exploratory search for weights summing above one where `w` fails.
    WCounterexampleSearch,
}

impl TheoremId {
    pub const ALL: [TheoremId; 13] = [
        TheoremId::EjsMean,
        TheoremId::MeanOfProducts,
        TheoremId::SetMeanProd,
        TheoremId::SetMeanSum,
        TheoremId::SymChainProd,
        TheoremId::SymChainSum,
        TheoremId::SymSingle,
        TheoremId::AlphaInclusion,
        TheoremId::SumProdLemma,
        TheoremId::RhoN,
        TheoremId::RhoTildeN,
        TheoremId::RhoBarN,
        TheoremId::WCounterexampleSearch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::EjsMean => "ejs-mean",
            TheoremId::MeanOfProducts => "mean-of-products",
            TheoremId::SetMeanProd => "set-mean-prod",
            TheoremId::SetMeanSum => "set-mean-sum",
            TheoremId::SymChainProd => "sym-chain-prod",
            TheoremId::SymChainSum => "sym-chain-sum",
            TheoremId::SymSingle => "sym-single",
            TheoremId::AlphaInclusion => "alpha-inclusion",
            TheoremId::SumProdLemma => "sum-prod-lemma",
            TheoremId::RhoN => "rho-n",
            TheoremId::RhoTildeN => "rho-tilde-n",
            TheoremId::RhoBarN => "rho-bar-n",
            TheoremId::WCounterexampleSearch => "w-counterexample-search",
        }
    }

    /// Whether the statement involves sets (and hence brackets for `r`, `j`).
    pub fn is_set_level(self) -> bool {
        !matches!(
            self,
            TheoremId::EjsMean | TheoremId::MeanOfProducts | TheoremId::WCounterexampleSearch
        )
    }

    pub fn default_rhos(self, regime: WeightRegime) -> Vec<Rho> {
        match (self, regime) {
            (TheoremId::AlphaInclusion, _) => vec![],
            (TheoremId::WCounterexampleSearch, _) => vec![Rho::R, Rho::Norm, Rho::W],
            (TheoremId::EjsMean | TheoremId::MeanOfProducts, WeightRegime::UnitSum) => {
                vec![Rho::R, Rho::Norm, Rho::W]
            }
            (TheoremId::EjsMean | TheoremId::MeanOfProducts, WeightRegime::GeOneSum) => {
                vec![Rho::R, Rho::Norm]
            }
            (TheoremId::SetMeanProd | TheoremId::SetMeanSum, WeightRegime::GeOneSum) => {
                vec![Rho::Norm]
            }
            _ => vec![Rho::R, Rho::Jsr, Rho::Norm, Rho::W],
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown theorem id '{s}'")))
    }
}

/// Functional selector. On single matrices `r`, `gsr` and `jsr` all mean
/// the spectral radius; on sets `r`/`gsr` is the generalized and `jsr` the
/// joint spectral radius (evaluated as brackets unless the set is a
/// singleton).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rho {
    R,
    Gsr,
    Jsr,
    Norm,
    W,
}

impl Rho {
    pub fn as_str(self) -> &'static str {
        match self {
            Rho::R => "r",
            Rho::Gsr => "gsr",
            Rho::Jsr => "jsr",
            Rho::Norm => "norm",
            Rho::W => "w",
        }
    }

    pub fn radius_kind(self) -> Option<RadiusKind> {
        match self {
            Rho::R | Rho::Gsr => Some(RadiusKind::Generalized),
            Rho::Jsr => Some(RadiusKind::Joint),
            Rho::Norm | Rho::W => None,
        }
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rho {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(Rho::R),
            "gsr" => Ok(Rho::Gsr),
            "jsr" => Ok(Rho::Jsr),
            "norm" => Ok(Rho::Norm),
            "w" => Ok(Rho::W),
            _ => Err(invalid(format!("unknown functional '{s}' (expected r, gsr, jsr, norm or w)"))),
        }
    }
}

/// Shape, randomness and tolerance settings for a batch of trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// Matrix dimension `n`.
    pub dim: usize,
    /// Elements per random set.
    pub set_size: usize,
    /// Number of mean factors (weighted means) or of sets in a chain/scan.
    pub n_factors: usize,
    /// Grid rows `k`: factors of a product.
    pub rows: usize,
    /// Grid columns `m`: factors of a mean or summands.
    pub cols: usize,
    /// Fraction of nonzero entries.
    pub density: f64,
    pub seed: u64,
    pub trials: usize,
    /// Relative tolerance for exactly evaluated functionals.
    pub tol: f64,
    /// Relative tolerance when either side is a bracket.
    pub bracket_tol: f64,
    pub alpha_steps: usize,
    pub budget: EnumerationBudget,
    pub regime: WeightRegime,
    /// Functionals to check; empty selects the theorem's defaults.
    pub rhos: Vec<Rho>,
    /// Draw each trial's shape uniformly with the sizes above as maxima.
    pub vary_shape: bool,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            set_size: 1,
            n_factors: 2,
            rows: 2,
            cols: 2,
            density: 1.0,
            seed: 0,
            trials: 100,
            tol: 1e-9,
            bracket_tol: 1e-7,
            alpha_steps: 21,
            budget: EnumerationBudget::default(),
            regime: WeightRegime::UnitSum,
            rhos: Vec::new(),
            vary_shape: false,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("set-size", self.set_size),
            ("n-factors", self.n_factors),
            ("rows", self.rows),
            ("cols", self.cols),
            ("trials", self.trials),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(invalid(format!("{name} must be >= 1")));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(invalid(format!("density {} must lie in (0, 1]", self.density)));
        }
        if self.alpha_steps < 2 {
            return Err(invalid("alpha-steps must be >= 2"));
        }
        for (name, t) in [("tol", self.tol), ("bracket tol", self.bracket_tol)] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid(format!("{name} must be finite and >= 0")));
            }
        }
        if self.budget.max_depth < 1 {
            return Err(invalid("depth must be >= 1"));
        }
        Ok(())
    }

    pub fn rhos_for(&self, theorem: TheoremId) -> Result<Vec<Rho>> {
        if self.rhos.is_empty() {
            return Ok(theorem.default_rhos(self.regime));
        }
        if self.regime == WeightRegime::GeOneSum
            && self.rhos.contains(&Rho::W)
            && theorem != TheoremId::WCounterexampleSearch
        {
            return Err(invalid(
                "the numerical radius is not covered for weights summing above one; \
                 use w-counterexample-search",
            ));
        }
        Ok(self.rhos.clone())
    }

    pub fn scan_config(&self) -> super::scan::ScanConfig {
        super::scan::ScanConfig {
            alpha_steps: self.alpha_steps,
            tol: self.tol,
            bracket_tol: self.bracket_tol,
            budget: self.budget,
        }
    }
}
