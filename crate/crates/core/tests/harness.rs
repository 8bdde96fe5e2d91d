use hjsr_core::harness::checks::{check_set_mean, check_weighted_mean, CheckContext};
use hjsr_core::harness::instance::{random_matrix, trial_rng};
use hjsr_core::harness::{random_instance, run_trial, scan_rho_bar_n, scan_rho_n, scan_rho_tilde_n, ScanConfig};
use hjsr_core::kernel::{discretize, KernelSpec};
use hjsr_core::{
    numerical_radius, operator_norm, spectral_radius, symmetrize_alpha, verify, weighted_geometric_mean,
    AlphaValue, Instance, MatrixSet, NonnegMatrix, Rho, Status, TheoremId, TrialConfig, WeightRegime,
    WeightVector,
};

fn rho_of(a: &NonnegMatrix, rho: Rho) -> f64 {
    match rho {
        Rho::Norm => operator_norm(a).unwrap(),
        Rho::W => numerical_radius(a).unwrap(),
        _ => spectral_radius(a).unwrap(),
    }
}

fn singletons(row: &[NonnegMatrix]) -> Vec<MatrixSet> {
    row.iter().cloned().map(MatrixSet::singleton).collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn singleton_set_chain_reduces_to_matrix_chain() {
    let rhos = [Rho::R, Rho::Jsr, Rho::Norm, Rho::W];
    for regime in [WeightRegime::UnitSum, WeightRegime::GeOneSum] {
        let cfg = TrialConfig { seed: 3, rows: 3, cols: 3, regime, ..Default::default() };
        let rhos: &[Rho] = if regime == WeightRegime::UnitSum { &rhos } else { &rhos[..3] };
        let ctx = CheckContext::new(&cfg, rhos);
        for i in 0..20 {
            let Instance::Grid { grid, weights } = random_instance(TheoremId::MeanOfProducts, &cfg, i).unwrap() else {
                panic!("expected a matrix grid");
            };
            let matrix_links = check_weighted_mean(&Instance::Grid { grid: grid.clone(), weights: weights.clone() }, &ctx).unwrap();
            let set_grid = grid.iter().map(|r| singletons(r)).collect();
            let set_links =
                check_set_mean(TheoremId::SetMeanProd, &Instance::SetGrid { grid: set_grid, weights }, &ctx).unwrap();
            // the matrix version leads with the entrywise link
            assert_eq!(matrix_links.len(), set_links.len() + 1);
            for (m, s) in matrix_links[1..].iter().zip(&set_links) {
                assert_eq!(m.label, s.label);
                assert_eq!(m.lhs, s.lhs, "trial {i} {}", m.label);
                assert_eq!(m.rhs, s.rhs, "trial {i} {}", m.label);
                assert_eq!(m.outcome, s.outcome);
            }
        }
    }
}

#[test]
fn singleton_mean_reduces_to_factor_mean() {
    let cfg = TrialConfig { seed: 8, n_factors: 4, ..Default::default() };
    let rhos = [Rho::R, Rho::Norm, Rho::W];
    let ctx = CheckContext::new(&cfg, &rhos);
    for i in 0..20 {
        let Instance::Factors { factors, weights } = random_instance(TheoremId::EjsMean, &cfg, i).unwrap() else {
            panic!("expected factors");
        };
        let m = check_weighted_mean(&Instance::Factors { factors: factors.clone(), weights: weights.clone() }, &ctx).unwrap();
        let inst = Instance::SetGrid { grid: vec![singletons(&factors)], weights };
        let s = check_set_mean(TheoremId::SetMeanProd, &inst, &ctx).unwrap();
        // second link per functional is rho(mean) <= prod rho(K_j)^a_j
        for (k, link) in m.iter().enumerate() {
            let set_link = &s[2 * k + 1];
            assert_eq!(link.lhs, set_link.lhs);
            assert_eq!(link.rhs, set_link.rhs);
        }
    }
}

#[test]
fn singleton_scans_match_definitions() {
    let cfg = ScanConfig { alpha_steps: 11, ..Default::default() };
    for seed in 0..10 {
        let mut rng = trial_rng(seed, 0);
        let a = random_matrix(&mut rng, 3, 0.8).unwrap();
        let b = random_matrix(&mut rng, 3, 0.8).unwrap();
        let c = random_matrix(&mut rng, 3, 0.8).unwrap();
        let d = random_matrix(&mut rng, 3, 0.8).unwrap();
        for rho in [Rho::R, Rho::Norm, Rho::W] {
            let sets = singletons(&[a.clone(), b.clone()]);
            let n = scan_rho_n(&sets, rho, &cfg).unwrap();
            let tilde = scan_rho_tilde_n(&sets, rho, &cfg).unwrap();
            let grid = vec![singletons(&[a.clone(), b.clone()]), singletons(&[c.clone(), d.clone()])];
            let bar = scan_rho_bar_n(&grid, rho, &cfg).unwrap();
            for (k, &alpha) in n.alphas.iter().enumerate() {
                let al = AlphaValue::new(alpha).unwrap();
                let (sa, sb) = (symmetrize_alpha(&a, al), symmetrize_alpha(&b, al));
                let (sc, sd) = (symmetrize_alpha(&c, al), symmetrize_alpha(&d, al));
                let fwd = rho_of(&sa.matmul(&sb).unwrap(), rho);
                let rev = rho_of(&sb.matmul(&sa).unwrap(), rho);
                assert!(close(n.values[k].lower, (fwd * rev).sqrt(), 1e-10), "rho_n {rho} {alpha}");
                let sum = rho_of(&sa.add(&sb).unwrap(), rho);
                assert!(close(tilde.values[k].lower, sum, 1e-10), "tilde {rho} {alpha}");
                let (r1, r2) = (sa.add(&sb).unwrap(), sc.add(&sd).unwrap());
                let want = (rho_of(&r1.matmul(&r2).unwrap(), rho) * rho_of(&r2.matmul(&r1).unwrap(), rho)).sqrt();
                assert!(close(bar.values[k].lower, want, 1e-10), "bar {rho} {alpha}");
                assert!(n.values[k].is_exact() && tilde.values[k].is_exact() && bar.values[k].is_exact());
            }
        }
    }
}

#[test]
fn findings_reproduce_from_seed() {
    let cfg = TrialConfig {
        seed: 21,
        trials: 200,
        n_factors: 2,
        dim: 2,
        regime: WeightRegime::GeOneSum,
        ..Default::default()
    };
    let rep = verify(TheoremId::WCounterexampleSearch, &cfg).unwrap();
    assert_ne!(rep.status, Status::Fail, "{:?}", rep.summary);
    for f in rep.findings.iter().chain(&rep.counterexamples) {
        let (inst, rec) = run_trial(TheoremId::WCounterexampleSearch, &cfg, f.trial).unwrap();
        assert_eq!(inst, f.instance);
        assert_eq!(rec, rep.trials[f.trial as usize]);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = TrialConfig { seed: 2, trials: 24, set_size: 2, ..Default::default() };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = one.install(|| verify(TheoremId::SetMeanSum, &cfg).unwrap());
    let parallel = verify(TheoremId::SetMeanSum, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&serial).unwrap(), serde_json::to_string(&parallel).unwrap());
}

#[test]
fn discretization_commutes_with_unit_means() {
    let kernels = [
        KernelSpec::parse("exp-diff", Some("0.7")).unwrap(),
        KernelSpec::parse("poly", Some("2,0.5")).unwrap(),
        KernelSpec::parse("rank-one", None).unwrap(),
    ];
    for n in [16, 32] {
        for k in &kernels {
            let d = discretize(k, n).unwrap();
            for alpha in [0.0, 0.2, 0.5, 0.9, 1.0] {
                let s = symmetrize_alpha(&d.matrix, AlphaValue::new(alpha).unwrap());
                for (i, &x) in d.nodes.iter().enumerate() {
                    for (j, &y) in d.nodes.iter().enumerate() {
                        let want = d.weight * k.eval(x, y).powf(alpha) * k.eval(y, x).powf(1.0 - alpha);
                        assert!(close(s.get(i, j), want, 1e-15 * 4.0), "{k} N={n} a={alpha}");
                    }
                }
            }
        }
        let (k1, k2) = (&kernels[0], &kernels[1]);
        let (d1, d2) = (discretize(k1, n).unwrap(), discretize(k2, n).unwrap());
        let w = WeightVector::unit(vec![0.3, 0.7]).unwrap();
        let mean = weighted_geometric_mean(&[d1.matrix, d2.matrix], &w).unwrap();
        for (i, &x) in d1.nodes.iter().enumerate() {
            for (j, &y) in d1.nodes.iter().enumerate() {
                let want = d1.weight * k1.eval(x, y).powf(0.3) * k2.eval(x, y).powf(0.7);
                assert!(close(mean.get(i, j), want, 4e-15));
            }
        }
    }
}
