//! Hadamard (Schur) algebra of nonnegative matrices and finite matrix sets,
//! scalar functionals `r`, `||.||`, `w`, certified brackets for the
//! generalized/joint spectral radius of a set, and a seeded verification
//! harness for inequalities between those quantities under weighted
//! geometric means and weighted geometric symmetrizations.

pub mod error;
pub mod functionals;
pub mod hadamard;
pub mod harness;
pub mod jsr;
pub mod kernel;
pub mod matrix;
pub mod set;

pub use error::{Error, Result};
pub use functionals::{numerical_radius, operator_norm, spectral_radius, FunctionalId};
pub use hadamard::{
    adjoint, hadamard_power, hadamard_product, symmetrize_alpha, weighted_geometric_mean,
    AlphaValue, WeightRegime, WeightVector,
};
pub use jsr::{
    compare_brackets, compare_rho, gsr_lower_bound, jsr_upper_bound, radius_bracket, Comparison,
    EnumerationBudget, Interval, RadiusBracket, RadiusKind,
};
pub use matrix::NonnegMatrix;
pub use set::{
    set_functional_sup, set_hadamard_mean, set_power, set_product, set_sum, set_symmetrize,
    MatrixSet, MatrixSetDoc, MeanMode, SetAlgebra,
};
pub use harness::{
    verify, AlphaCurve, Instance, Outcome, Rho, Status, TheoremId, TrialConfig, VerificationReport,
};
pub use kernel::{discretize, refinement_study, KernelSpec};
