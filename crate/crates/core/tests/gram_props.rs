mod common;

use common::*;
use corrlab::{compute_gram, convex_combine, BlockOperator, Error, GramMatrix, TracialAlgebra, UnitaryTuple};
use proptest::prelude::*;

fn tuple(alg: &TracialAlgebra, n: usize, r: &mut rand_chacha::ChaCha8Rng) -> UnitaryTuple {
    UnitaryTuple::new(alg.clone(), (0..n).map(|_| unitary_op(alg, r)).collect()).unwrap()
}

fn max_diff(a: &GramMatrix, b: &GramMatrix) -> f64 {
    a.max_abs_diff(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gram_of_unitaries_is_valid(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng(seed);
        let alg = random_algebra(&mut r, 2, 6);
        let g = compute_gram(&tuple(&alg, n, &mut r));
        let report = g.validate(1e-8);
        prop_assert!(report.passes, "{:?}", report);
        prop_assert!(report.hermiticity_defect <= 1e-10 && report.diagonal_defect <= 1e-10);
        prop_assert!(report.min_eigenvalue >= -1e-8);
    }

    #[test]
    fn gram_is_left_and_conjugation_invariant(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng(seed);
        let alg = random_algebra(&mut r, 2, 6);
        let t = tuple(&alg, n, &mut r);
        let w = unitary_op(&alg, &mut r);
        let g = compute_gram(&t);
        let left: Vec<BlockOperator> = t.unitaries().iter().map(|u| w.multiply(u).unwrap()).collect();
        let conj: Vec<BlockOperator> =
            t.unitaries().iter().map(|u| w.adjoint().multiply(u).unwrap().multiply(&w).unwrap()).collect();
        for ops in [left, conj] {
            let h = compute_gram(&UnitaryTuple::new(alg.clone(), ops).unwrap());
            prop_assert!(max_diff(&g, &h) <= 1e-10);
        }
    }

    #[test]
    fn convex_combination_is_affine(seed in any::<u64>(), n in 1usize..=8, lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let (a1, a2) = (random_algebra(&mut r, 2, 4), random_algebra(&mut r, 2, 4));
        let (t1, t2) = (tuple(&a1, n, &mut r), tuple(&a2, n, &mut r));
        let mixed = compute_gram(&convex_combine(&t1, &t2, lambda).unwrap());
        let want = compute_gram(&t1).entries() * nalgebra::Complex::new(lambda, 0.0)
            + compute_gram(&t2).entries() * nalgebra::Complex::new(1.0 - lambda, 0.0);
        prop_assert!(max_diff(&mixed, &GramMatrix::new(want).unwrap()) <= 1e-12);
    }
}

#[test]
fn quarter_mixture_matches_recomputation() {
    let mut r = rng(11);
    let alg = TracialAlgebra::single(3).unwrap();
    let (t1, t2) = (tuple(&alg, 5, &mut r), tuple(&alg, 5, &mut r));
    let mixed = convex_combine(&t1, &t2, 0.25).unwrap();
    assert_eq!(mixed.algebra().weights(), &[0.25, 0.75]);
    let g = compute_gram(&mixed);
    let (g1, g2) = (compute_gram(&t1), compute_gram(&t2));
    for i in 0..5 {
        for j in 0..5 {
            assert!((g.get(i, j) - (g1.get(i, j) * 0.25 + g2.get(i, j) * 0.75)).norm() <= 1e-12);
        }
    }
}

#[test]
fn offending_index_is_reported() {
    let alg = TracialAlgebra::single(2).unwrap();
    let bad = alg.scalar(corrlab::C64::new(0.5, 0.0));
    match UnitaryTuple::new(alg.clone(), vec![alg.identity(), alg.identity(), bad]) {
        Err(Error::NotUnitary { index, .. }) => assert_eq!(index, 3),
        other => panic!("expected NotUnitary, got {other:?}"),
    }
    let t1 = UnitaryTuple::new(alg.clone(), vec![alg.identity()]).unwrap();
    let t2 = UnitaryTuple::new(alg.clone(), vec![alg.identity(); 2]).unwrap();
    assert!(matches!(
        convex_combine(&t1, &t2, 0.5),
        Err(Error::LengthMismatch { .. })
    ));
}
