use hjsr_core::{
    radius_bracket, set_power, set_product, set_symmetrize, spectral_radius, AlphaValue, EnumerationBudget,
    MatrixSet, NonnegMatrix, RadiusBracket, RadiusKind,
};
use hjsr_core::harness::{check_alpha_inclusion, InclusionBranch};
use proptest::prelude::*;

const SET_TOL: f64 = 1e-12;

fn matrix(n: usize) -> impl Strategy<Value = NonnegMatrix> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0..1.0f64], n * n)
        .prop_map(move |v| NonnegMatrix::new(n, v).unwrap())
}

fn set(n: usize, size: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = MatrixSet> {
    prop::collection::vec(matrix(n), size).prop_map(|v| MatrixSet::new(v).unwrap())
}

fn any_set(max_n: usize, max_len: usize) -> impl Strategy<Value = MatrixSet> {
    (1..=max_n).prop_flat_map(move |n| set(n, 1..=max_len))
}

fn bracket(s: &MatrixSet, kind: RadiusKind, depth: usize) -> RadiusBracket {
    radius_bracket(s, kind, &EnumerationBudget::with_depth(depth)).unwrap()
}

fn m(rows: &[[f64; 2]]) -> NonnegMatrix {
    NonnegMatrix::from_rows(rows).unwrap()
}

#[test]
fn shift_pair_bracket_is_exact() {
    let s = MatrixSet::new(vec![m(&[[0.0, 1.0], [0.0, 0.0]]), m(&[[0.0, 0.0], [1.0, 0.0]])]).unwrap();
    for kind in [RadiusKind::Generalized, RadiusKind::Joint] {
        let b = bracket(&s, kind, 2);
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12, "{b:?}");
        assert!(!b.partial);
    }
}

#[test]
fn product_cap_gives_partial_bracket() {
    let s = MatrixSet::new((0..4).map(|k| m(&[[1.0, k as f64], [0.5, 1.0]])).collect()).unwrap();
    let budget = EnumerationBudget { max_depth: 10, max_products: 100, prune: false };
    let b = radius_bracket(&s, RadiusKind::Joint, &budget).unwrap();
    assert!(b.partial);
    assert!(b.depth_used < 10);
    assert!(b.lower <= b.upper);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_of_symmetrization((s, alpha) in (any_set(4, 3), 0.0..=1.0f64)) {
        let al = AlphaValue::new(alpha).unwrap();
        let lhs = set_symmetrize(&s, al).unwrap().adjoint();
        let rhs = set_symmetrize(&s, al.complement()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, SET_TOL));
    }

    #[test]
    fn inclusion_lemmas_hold((s, x, y, upper) in (
        (1..=3usize).prop_flat_map(|n| set(n, 1..=3)),
        0.0..0.5f64,
        0.0..0.5f64,
        any::<bool>(),
    )) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let (a1, a2) = if upper { (1.0 - hi, 1.0 - lo) } else { (lo, hi) };
        let chk = check_alpha_inclusion(&s, AlphaValue::new(a1).unwrap(), AlphaValue::new(a2).unwrap()).unwrap();
        if a1 != a2 {
            let want = if upper { InclusionBranch::Upper } else { InclusionBranch::Lower };
            prop_assert_eq!(chk.branch, want);
        }
        prop_assert!(chk.included, "missing {} of {}", chk.missing, chk.checked);
    }

    #[test]
    fn product_associative_and_power_additive((s, a, b) in (any_set(3, 2), 1..=3usize, 1..=2usize)) {
        let p = set_power(&s, a + b).unwrap();
        let q = set_product(&set_power(&s, a).unwrap(), &set_power(&s, b).unwrap()).unwrap();
        prop_assert!(p.approx_eq(&q, SET_TOL));
        let s2 = set_power(&s, 2).unwrap();
        let left = set_product(&set_product(&s, &s2).unwrap(), &s).unwrap();
        let right = set_product(&s, &set_product(&s2, &s).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, SET_TOL));
    }

    #[test]
    fn bracket_ordering(s in any_set(4, 3)) {
        let g = bracket(&s, RadiusKind::Generalized, 6);
        let j = bracket(&s, RadiusKind::Joint, 6);
        prop_assert!(g.lower <= j.upper + 1e-9);
        prop_assert!(g.lower <= g.upper && j.lower <= j.upper);
    }

    #[test]
    fn singleton_bracket_collapses(a in matrix(3)) {
        let r = spectral_radius(&a).unwrap();
        let b = bracket(&MatrixSet::singleton(a), RadiusKind::Joint, 8);
        prop_assert!(b.lower <= r * (1.0 + 1e-12) + 1e-300);
        prop_assert!(b.upper - b.lower <= 1e-6 * r.max(1.0), "{b:?}, r = {r}");
    }

    #[test]
    fn power_identity_overlaps(s in any_set(3, 3)) {
        let b = bracket(&s, RadiusKind::Joint, 6);
        let b2 = bracket(&set_power(&s, 2).unwrap(), RadiusKind::Joint, 3);
        let tol = 1e-9;
        prop_assert!(b2.lower <= b.upper * b.upper * (1.0 + tol) + tol);
        prop_assert!(b.lower * b.lower <= b2.upper * (1.0 + tol) + tol);
    }

    #[test]
    fn commutation_overlaps((p, q) in (1..=3usize).prop_flat_map(|n| (set(n, 1..=2), set(n, 1..=2)))) {
        let pq = bracket(&set_product(&p, &q).unwrap(), RadiusKind::Joint, 5);
        let qp = bracket(&set_product(&q, &p).unwrap(), RadiusKind::Joint, 5);
        let tol = 1e-9;
        prop_assert!(pq.lower <= qp.upper * (1.0 + tol) + tol);
        prop_assert!(qp.lower <= pq.upper * (1.0 + tol) + tol);
    }

    #[test]
    fn monotone_in_depth(s in any_set(3, 3)) {
        for kind in [RadiusKind::Generalized, RadiusKind::Joint] {
            let mut prev: Option<RadiusBracket> = None;
            for depth in 1..=6 {
                let b = bracket(&s, kind, depth);
                if let Some(p) = prev {
                    // m-th roots are rounded, and a crossing clamp can move an ulp or two
                    let slack = 4.0 * f64::EPSILON * p.upper.max(p.lower);
                    prop_assert!(b.lower >= p.lower - slack, "lower fell at depth {depth}");
                    prop_assert!(b.upper <= p.upper + slack, "upper rose at depth {depth}");
                }
                prev = Some(b);
            }
        }
    }

    #[test]
    fn pruning_does_not_change_brackets((s, depth) in (any_set(4, 3), 1..=5usize)) {
        for kind in [RadiusKind::Generalized, RadiusKind::Joint] {
            let on = radius_bracket(&s, kind, &EnumerationBudget { max_depth: depth, prune: true, ..Default::default() }).unwrap();
            let off = radius_bracket(&s, kind, &EnumerationBudget { max_depth: depth, prune: false, ..Default::default() }).unwrap();
            prop_assert!((on.lower - off.lower).abs() <= 1e-12 * on.lower.max(1.0));
            prop_assert!((on.upper - off.upper).abs() <= 1e-12 * on.upper.max(1.0));
        }
    }
}
