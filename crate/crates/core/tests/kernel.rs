use hjsr_core::harness::alpha_grid;
use hjsr_core::kernel::{exp_diff_symmetrized_norm, RefinementConfig};
use hjsr_core::{refinement_study, KernelSpec, Outcome, Rho, TheoremId};

#[test]
fn exp_diff_norm_converges_quadratically() {
    let k = KernelSpec::parse("exp-diff", Some("1")).unwrap();
    let cfg = RefinementConfig { rho: Rho::Norm, ..Default::default() };
    let rep = refinement_study(&k, TheoremId::RhoN, &[16, 32, 64], &cfg).unwrap();
    assert!(rep.outcomes_agree);
    let alphas = alpha_grid(cfg.alpha_steps).unwrap();
    let errors: Vec<f64> = rep
        .rows
        .iter()
        .map(|row| {
            alphas
                .iter()
                .zip(&row.values)
                .map(|(&a, v)| (v - exp_diff_symmetrized_norm(1.0, a)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errors[2] < 1e-3);
    // halving h should divide the midpoint-rule error by about four
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "errors {errors:?}");
    }
}

#[test]
fn constant_kernel_curve_is_flat_one() {
    let k = KernelSpec::parse("constant", None).unwrap();
    let rep = refinement_study(&k, TheoremId::RhoN, &[16, 32, 64], &RefinementConfig::default()).unwrap();
    for row in &rep.rows {
        assert_eq!(row.outcome, Outcome::Pass);
        assert!(row.values.iter().all(|v| (v - 1.0).abs() <= 1e-12), "N={}", row.n);
    }
}
