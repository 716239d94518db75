use kness_core::classify::classify_orbit;
use kness_core::kfun::{k_functional, wedge_defect};
use kness_core::matrix::{adjoint_star, commutator, inner, matrix_exp, ComplexMatrix, C64};
use kness_core::partition::{
    c_constant, dominance_compare, lambda_sequence, rational_to_f64, match_lambda_forms, successor_pair_dual, successor_pair_split,
    Dominance, Partition,
};
use kness_core::sample::{random_conjugate, random_trace_free, random_unitary, random_vector, rng_for};
use kness_core::sl2::{build_standard_triple, Sl2Element};
use kness_core::spectral::jordan_matrix;
use kness_core::Tolerances;
use proptest::prelude::*;

fn partition() -> impl Strategy<Value = Partition> {
    prop::collection::vec(1u32..6, 1..6).prop_map(|v| Partition::from_unsorted(v).unwrap())
}

fn nontrivial() -> impl Strategy<Value = Partition> {
    partition().prop_filter("non-trivial", |p| !p.is_trivial())
}

/// Cuts `n` greedily by `sizes`.
fn partition_of(n: u32, sizes: &[u32]) -> Partition {
    let mut left = n;
    let mut parts = Vec::new();
    for &k in sizes {
        if left == 0 {
            break;
        }
        parts.push(k.min(left));
        left -= k.min(left);
    }
    Partition::from_unsorted(parts).unwrap()
}

fn same_size_pair() -> impl Strategy<Value = (Partition, Partition)> {
    (2u32..13).prop_flat_map(|n| {
        let sizes = prop::collection::vec(1..=n, n as usize);
        (sizes.clone(), sizes).prop_map(move |(a, b)| (partition_of(n, &a), partition_of(n, &b)))
    })
}

fn complex() -> impl Strategy<Value = C64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| C64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_identity(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = rng_for(seed, 0);
        let (a, x, y) = (random_trace_free(&mut rng, n), random_trace_free(&mut rng, n), random_trace_free(&mut rng, n));
        let lhs = inner(&commutator(&a, &x).unwrap(), &y).unwrap();
        let rhs = inner(&x, &commutator(&adjoint_star(&a), &y).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * a.norm() * x.norm() * y.norm());
    }

    #[test]
    fn commutators_are_trace_free(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = rng_for(seed, 1);
        let (x, y) = (random_trace_free(&mut rng, n), random_trace_free(&mut rng, n));
        let c = commutator(&x, &y).unwrap();
        prop_assert!(c.trace().norm() <= 1e-12 * x.norm() * y.norm());
    }

    #[test]
    fn exp_inverse(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_for(seed, 2);
        let b = random_trace_free(&mut rng, n);
        let p = matrix_exp(&b).unwrap().matmul(&matrix_exp(&-b).unwrap());
        prop_assert!(p.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-9);
    }

    #[test]
    fn denominator_nonnegative(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = rng_for(seed, 3);
        let a = random_trace_free(&mut rng, n);
        let r = k_functional(&a).unwrap();
        prop_assert!(r.denominator >= 0.0);
        prop_assert!(r.k0 <= r.k_value.unwrap() + 1e-12);
    }

    #[test]
    fn k_invariant_under_scaling_and_unitaries(seed in any::<u64>(), n in 2usize..6, c in complex()) {
        prop_assume!(c.norm() > 1e-3);
        let mut rng = rng_for(seed, 4);
        let a = random_trace_free(&mut rng, n);
        let u = random_unitary(&mut rng, n);
        let k = k_functional(&a).unwrap().k().unwrap();
        let ks = k_functional(&a.scale(c)).unwrap().k().unwrap();
        let ku = k_functional(&u.matmul(&a).matmul(&u.star())).unwrap().k().unwrap();
        prop_assert!((ks - k).abs() <= 1e-9 * k);
        prop_assert!((ku - k).abs() <= 1e-9 * k);
    }

    #[test]
    fn k_constant_on_standard_triples(p in nontrivial(), a in complex(), b in complex(), c in complex()) {
        let el = Sl2Element::new(a, b, c);
        prop_assume!(!el.in_z(1e-6));
        let t = build_standard_triple(&p);
        let k = k_functional(&t.embed(el)).unwrap().k().unwrap();
        let want = rational_to_f64(c_constant(&p).unwrap());
        prop_assert!((k - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn wedge_nonnegative(seed in any::<u64>(), m in 1usize..11) {
        let mut rng = rng_for(seed, 5);
        let (x, y, z) = (random_vector(&mut rng, m), random_vector(&mut rng, m), random_vector(&mut rng, m));
        prop_assert!(wedge_defect(&x, &y, &z).unwrap() >= -1e-9);
    }

    #[test]
    fn lambda_form_round_trip(p in nontrivial(), t in 0.1f64..10.0) {
        let values: Vec<f64> = lambda_sequence(&p).values.iter().map(|&v| v as f64 * t).collect();
        let forms = match_lambda_forms(&values, 1e-9).unwrap();
        prop_assert!(forms.iter().any(|f| f.partition == p && (f.scale - t).abs() <= 1e-9 * t));
        prop_assert!(forms.len() <= 2);
    }

    #[test]
    fn dual_law(p in nontrivial()) {
        if let Some(split) = successor_pair_split(&p) {
            prop_assert!(p.all_odd());
            prop_assert_eq!(successor_pair_dual(&split), Some(p.clone()));
            prop_assert_eq!(c_constant(&split).unwrap(), c_constant(&p).unwrap() * 4);
        }
    }

    #[test]
    fn dominance_antimonotone((p, q) in same_size_pair()) {
        if !p.is_trivial() && !q.is_trivial() && dominance_compare(&p, &q).unwrap() == Dominance::Less {
            prop_assert!(c_constant(&p).unwrap() > c_constant(&q).unwrap());
        }
    }

    #[test]
    fn classification_is_conjugation_invariant(seed in any::<u64>(), pick in 0usize..5) {
        let fixtures = [
            ComplexMatrix::real_diag(&[2.0, 0.0, -2.0]),
            ComplexMatrix::real_diag(&[3.0, -1.0, -2.0]),
            ComplexMatrix::real_diag(&[1.0, 1.0, 0.0, -1.0, -1.0]),
            build_standard_triple(&"3,1".parse().unwrap()).e,
            jordan_matrix(&[(2, C64::new(1.0, 0.0)), (1, C64::new(-2.0, 0.0))]).unwrap(),
        ];
        let a = &fixtures[pick];
        let tol = Tolerances::default();
        let base = classify_orbit(a, &tol).unwrap();
        let mut rng = rng_for(seed, 6);
        let g = random_conjugate(&mut rng, a, 0.6);
        let c = classify_orbit(&g, &tol).unwrap();
        prop_assert_eq!(c.case_id, base.case_id);
        prop_assert_eq!(c.infimum.exact, base.infimum.exact);
        prop_assert!((c.infimum.value - base.infimum.value).abs() < 1e-9);
    }
}
