use hjsr_core::{
    adjoint, hadamard_power, hadamard_product, symmetrize_alpha, weighted_geometric_mean, AlphaValue,
    NonnegMatrix, WeightRegime, WeightVector,
};
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = NonnegMatrix> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0..10.0f64], n * n)
        .prop_map(move |v| NonnegMatrix::new(n, v).unwrap())
}

fn triple(max_n: usize) -> impl Strategy<Value = (NonnegMatrix, NonnegMatrix, NonnegMatrix)> {
    (1..=max_n).prop_flat_map(|n| (matrix(n), matrix(n), matrix(n)))
}

fn weights(m: usize, scale: std::ops::Range<f64>) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0.01..1.0f64, m), scale).prop_map(|(raw, s)| {
        let total: f64 = raw.iter().sum();
        raw.iter().map(|x| x / total * s).collect()
    })
}

fn unit(ws: Vec<f64>) -> WeightVector {
    // renormalize so rounding never pushes the sum off one
    let total: f64 = ws.iter().sum();
    WeightVector::new(ws.iter().map(|w| w / total).collect(), WeightRegime::UnitSum).unwrap()
}

#[test]
fn endpoint_symmetrizations() {
    let a = NonnegMatrix::from_rows(&[[0.0, 2.0, 1.0], [3.0, 0.0, 0.0], [0.5, 7.0, 1.0]]).unwrap();
    assert_eq!(symmetrize_alpha(&a, AlphaValue::new(1.0).unwrap()), a);
    assert_eq!(symmetrize_alpha(&a, AlphaValue::new(0.0).unwrap()), a.transpose());
    assert_eq!(hadamard_power(&a, 0.0).unwrap(), NonnegMatrix::ones(3));
    assert_eq!(adjoint(&a), a.transpose());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hadamard_product_laws((a, b, c) in triple(8)) {
        let n = a.dim();
        prop_assert_eq!(hadamard_product(&a, &b).unwrap(), hadamard_product(&b, &a).unwrap());
        prop_assert_eq!(hadamard_product(&a, &NonnegMatrix::ones(n)).unwrap(), a.clone());
        let left = hadamard_product(&hadamard_product(&a, &b).unwrap(), &c).unwrap();
        let right = hadamard_product(&a, &hadamard_product(&b, &c).unwrap()).unwrap();
        // reassociating a floating product changes the last bit at most
        prop_assert!(left.approx_eq(&right, 4.0 * f64::EPSILON));
    }

    #[test]
    fn am_gm((a, b, c) in triple(5), ws in weights(3, 1.0..1.0001)) {
        let w = unit(ws);
        let mats = [a, b, c];
        let g = weighted_geometric_mean(&mats, &w).unwrap();
        let mut arith = NonnegMatrix::zeros(g.dim());
        for (m, &wt) in mats.iter().zip(w.weights()) {
            arith = arith.add(&m.scale(wt).unwrap()).unwrap();
        }
        prop_assert!(g.entrywise_excess(&arith).unwrap() <= 1e-12);
    }

    #[test]
    fn symmetrization_transpose_identity(a in (1..=6usize).prop_flat_map(matrix), k in 0..=1024u32, alpha in 0.0..=1.0f64) {
        // exact whenever 1 - (1 - alpha) == alpha, e.g. on dyadic alpha
        let dy = AlphaValue::new(f64::from(k) / 1024.0).unwrap();
        prop_assert_eq!(symmetrize_alpha(&a, dy).transpose(), symmetrize_alpha(&a, dy.complement()));
        let al = AlphaValue::new(alpha).unwrap();
        prop_assert!(symmetrize_alpha(&a, al).transpose().approx_eq(&symmetrize_alpha(&a, al.complement()), 1e-14));
        prop_assert!(symmetrize_alpha(&a, AlphaValue::HALF).is_symmetric());
    }

    #[test]
    fn sum_of_means_below_mean_of_sums(
        (rows, ws) in (1..=4usize, 1..=4usize, 1..=4usize).prop_flat_map(|(n, k, m)| (
            prop::collection::vec(prop::collection::vec(matrix(n), m), k),
            weights(m, 1.0..3.0),
        ))
    ) {
        let total: f64 = ws.iter().sum();
        prop_assume!(total >= 1.0);
        let w = WeightVector::new(ws, WeightRegime::GeOneSum).unwrap();
        let n = rows[0][0].dim();
        let m = rows[0].len();
        let mut lhs = NonnegMatrix::zeros(n);
        for row in &rows {
            lhs = lhs.add(&weighted_geometric_mean(row, &w).unwrap()).unwrap();
        }
        let cols: Vec<NonnegMatrix> = (0..m)
            .map(|j| rows.iter().fold(NonnegMatrix::zeros(n), |acc, r| acc.add(&r[j]).unwrap()))
            .collect();
        let rhs = weighted_geometric_mean(&cols, &w).unwrap();
        prop_assert!(lhs.entrywise_excess(&rhs).unwrap() <= 1e-12 * rhs.max_entry().max(1.0));
    }
}
