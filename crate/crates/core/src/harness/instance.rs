//! Seeded random instances. Trial `i` of a run with master seed `s` draws
//! from ChaCha8 seeded with `s` on stream `i`, so any single trial can be
//! regenerated without replaying the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::config::{TheoremId, TrialConfig};
use crate::error::{Error, Result};
use crate::hadamard::{AlphaValue, WeightRegime, WeightVector};
use crate::matrix::NonnegMatrix;
use crate::set::MatrixSet;

const NONZERO_RETRIES: usize = 100;

/// The random data one trial runs on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    /// Mean factors `K_1..K_m`.
    Factors { factors: Vec<NonnegMatrix>, weights: WeightVector },
    /// `grid[i][j] = K_ij`, `i` over product factors, `j` over mean factors.
    Grid { grid: Vec<Vec<NonnegMatrix>>, weights: WeightVector },
    SetGrid { grid: Vec<Vec<MatrixSet>>, weights: WeightVector },
    Sets { sets: Vec<MatrixSet>, alpha: AlphaValue },
    AlphaPair { set: MatrixSet, a1: AlphaValue, a2: AlphaValue },
    /// Two grids; `i` over product factors, `j` over summands.
    PairGrid { psi: Vec<Vec<MatrixSet>>, sigma: Vec<Vec<MatrixSet>>, alpha: AlphaValue },
    ScanSets { sets: Vec<MatrixSet> },
    ScanGrid { grid: Vec<Vec<MatrixSet>> },
}

pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Entries `Exp(1)`, each kept with probability `density`; retried until
/// some entry is nonzero.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> Result<NonnegMatrix> {
    for _ in 0..NONZERO_RETRIES {
        let data: Vec<f64> = (0..n * n)
            .map(|_| {
                let v: f64 = rng.sample(Exp1);
                if rng.random::<f64>() < density { v } else { 0.0 }
            })
            .collect();
        if data.iter().any(|&v| v > 0.0) {
            return NonnegMatrix::new(n, data);
        }
    }
    Err(Error::InvalidInput(format!(
        "no nonzero {n}x{n} matrix at density {density} after {NONZERO_RETRIES} draws"
    )))
}

pub fn random_set<R: Rng + ?Sized>(rng: &mut R, n: usize, size: usize, density: f64) -> Result<MatrixSet> {
    MatrixSet::new((0..size).map(|_| random_matrix(rng, n, density)).collect::<Result<_>>()?)
}

/// Flat Dirichlet weights; in the `GeOneSum` regime scaled by `U[1, 3]`.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, m: usize, regime: WeightRegime) -> Result<WeightVector> {
    let e: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE).collect();
    let total: f64 = e.iter().sum();
    let scale = match regime {
        WeightRegime::UnitSum => 1.0,
        WeightRegime::GeOneSum => rng.random_range(1.0..3.0),
    };
    WeightVector::new(e.iter().map(|x| scale * x / total).collect(), regime)
}

/// Every fifth trial pins `alpha` to 0, 1 or 1/2; the rest are uniform.
fn random_alpha<R: Rng + ?Sized>(rng: &mut R, index: u64) -> AlphaValue {
    let v = match index % 5 {
        0 => 0.0,
        1 => 1.0,
        2 => 0.5,
        _ => rng.random::<f64>(),
    };
    AlphaValue::new(v).expect("in range")
}

struct Shape {
    dim: usize,
    set_size: usize,
    n_factors: usize,
    rows: usize,
    cols: usize,
}

fn shape<R: Rng + ?Sized>(rng: &mut R, cfg: &TrialConfig) -> Shape {
    if !cfg.vary_shape {
        return Shape {
            dim: cfg.dim,
            set_size: cfg.set_size,
            n_factors: cfg.n_factors,
            rows: cfg.rows,
            cols: cfg.cols,
        };
    }
    Shape {
        dim: rng.random_range(1..=cfg.dim),
        set_size: rng.random_range(1..=cfg.set_size),
        n_factors: rng.random_range(1..=cfg.n_factors),
        rows: rng.random_range(1..=cfg.rows),
        cols: rng.random_range(1..=cfg.cols),
    }
}

/// Draws the instance for trial `index`.
pub fn random_instance(theorem: TheoremId, cfg: &TrialConfig, index: u64) -> Result<Instance> {
    let mut rng = trial_rng(cfg.seed, index);
    let rng = &mut rng;
    let sh = shape(rng, cfg);
    let (n, d) = (sh.dim, cfg.density);
    let sets = |rng: &mut ChaCha8Rng, count: usize| -> Result<Vec<MatrixSet>> {
        (0..count).map(|_| random_set(rng, n, sh.set_size, d)).collect()
    };
    let set_grid = |rng: &mut ChaCha8Rng| -> Result<Vec<Vec<MatrixSet>>> {
        (0..sh.rows).map(|_| sets(rng, sh.cols)).collect()
    };
    Ok(match theorem {
        TheoremId::EjsMean | TheoremId::WCounterexampleSearch => {
            let regime = if theorem == TheoremId::WCounterexampleSearch {
                WeightRegime::GeOneSum
            } else {
                cfg.regime
            };
            let factors = (0..sh.n_factors)
                .map(|_| random_matrix(rng, n, d))
                .collect::<Result<_>>()?;
            let weights = random_weights(rng, sh.n_factors, regime)?;
            Instance::Factors { factors, weights }
        }
        TheoremId::MeanOfProducts => {
            let grid = (0..sh.rows)
                .map(|_| (0..sh.cols).map(|_| random_matrix(rng, n, d)).collect())
                .collect::<Result<_>>()?;
            let weights = random_weights(rng, sh.cols, cfg.regime)?;
            Instance::Grid { grid, weights }
        }
        TheoremId::SetMeanProd | TheoremId::SetMeanSum => {
            let grid = set_grid(rng)?;
            let weights = random_weights(rng, sh.cols, cfg.regime)?;
            Instance::SetGrid { grid, weights }
        }
        TheoremId::SymChainProd | TheoremId::SymChainSum => {
            let s = sets(rng, sh.n_factors)?;
            Instance::Sets { sets: s, alpha: random_alpha(rng, index) }
        }
        TheoremId::SymSingle => {
            let s = sets(rng, 1)?;
            Instance::Sets { sets: s, alpha: random_alpha(rng, index) }
        }
        TheoremId::AlphaInclusion => {
            let set = random_set(rng, n, sh.set_size, d)?;
            let (x, y) = (rng.random::<f64>() * 0.5, rng.random::<f64>() * 0.5);
            let (lo, hi) = (x.min(y), x.max(y));
            // odd trials mirror the pair onto the upper branch
            let (a1, a2) = if index.is_multiple_of(2) { (lo, hi) } else { (1.0 - hi, 1.0 - lo) };
            Instance::AlphaPair {
                set,
                a1: AlphaValue::new(a1)?,
                a2: AlphaValue::new(a2)?,
            }
        }
        TheoremId::SumProdLemma => {
            let psi = set_grid(rng)?;
            let sigma = set_grid(rng)?;
            Instance::PairGrid { psi, sigma, alpha: random_alpha(rng, index) }
        }
        TheoremId::RhoN | TheoremId::RhoTildeN => Instance::ScanSets { sets: sets(rng, sh.n_factors)? },
        TheoremId::RhoBarN => Instance::ScanGrid { grid: set_grid(rng)? },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let cfg = TrialConfig { seed: 7, ..Default::default() };
        for t in TheoremId::ALL {
            let a = random_instance(t, &cfg, 3).unwrap();
            let b = random_instance(t, &cfg, 3).unwrap();
            assert_eq!(a, b);
            let c = random_instance(t, &cfg, 4).unwrap();
            assert_ne!(a, c, "{t}");
        }
    }

    #[test]
    fn full_density_has_no_zero_entries() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 4, 1.0).unwrap();
            assert!(a.as_slice().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn sparse_matrices_are_never_zero() {
        let mut rng = trial_rng(2, 0);
        for _ in 0..200 {
            assert!(!random_matrix(&mut rng, 2, 0.05).unwrap().is_zero());
        }
    }

    #[test]
    fn weights_respect_regime() {
        let mut rng = trial_rng(3, 0);
        for m in 1..6 {
            let w = random_weights(&mut rng, m, WeightRegime::UnitSum).unwrap();
            assert!((w.sum() - 1.0).abs() < 1e-12);
            let w = random_weights(&mut rng, m, WeightRegime::GeOneSum).unwrap();
            assert!(w.sum() >= 1.0 - 1e-12 && w.sum() <= 3.0 + 1e-12);
        }
    }

    #[test]
    fn instances_round_trip_through_json() {
        let cfg = TrialConfig { set_size: 2, ..Default::default() };
        for t in TheoremId::ALL {
            let inst = random_instance(t, &cfg, 0).unwrap();
            let text = serde_json::to_string(&inst).unwrap();
            let back: Instance = serde_json::from_str(&text).unwrap();
            assert_eq!(back, inst, "{t}");
        }
    }

    #[test]
    fn varied_shapes_stay_within_maxima() {
        let cfg = TrialConfig { dim: 4, n_factors: 3, vary_shape: true, ..Default::default() };
        for i in 0..30 {
            if let Instance::Factors { factors, weights } =
                random_instance(TheoremId::EjsMean, &cfg, i).unwrap()
            {
                assert!(factors.len() <= 3 && factors[0].dim() <= 4);
                assert_eq!(weights.len(), factors.len());
            } else {
                panic!("wrong instance kind");
            }
        }
    }
}
