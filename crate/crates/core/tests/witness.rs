use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use corrlab::certificate::certificate;
use corrlab::witness::*;
use corrlab::{compute_gram, GramMatrix, C64};

/// `e_j ↦ phase[j]·e_{perm[j]}`.
#[derive(Clone)]
struct Monomial {
    perm: Vec<usize>,
    phase: Vec<C64>,
}

impl Monomial {
    fn identity(d: usize) -> Self {
        Self {
            perm: (0..d).collect(),
            phase: vec![C64::new(1.0, 0.0); d],
        }
    }

    fn diagonal(phase: Vec<C64>) -> Self {
        Self {
            perm: (0..phase.len()).collect(),
            phase,
        }
    }

    fn permutation(perm: Vec<usize>) -> Self {
        let d = perm.len();
        Self {
            perm,
            phase: vec![C64::new(1.0, 0.0); d],
        }
    }

    /// `self ∘ other`.
    fn then(&self, other: &Self) -> Self {
        let d = self.perm.len();
        let perm = (0..d).map(|j| self.perm[other.perm[j]]).collect();
        let phase = (0..d).map(|j| self.phase[other.perm[j]] * other.phase[j]).collect();
        Self { perm, phase }
    }

    fn adjoint(&self) -> Self {
        let d = self.perm.len();
        let mut perm = vec![0; d];
        let mut phase = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            perm[self.perm[j]] = j;
            phase[self.perm[j]] = self.phase[j].conj();
        }
        Self { perm, phase }
    }

    fn trace(&self) -> C64 {
        let d = self.perm.len();
        (0..d)
            .filter(|&j| self.perm[j] == j)
            .map(|j| self.phase[j])
            .sum::<C64>()
            / d as f64
    }
}

type Sparse = Vec<(C64, Monomial)>;

fn mul(x: &Sparse, y: &Sparse) -> Sparse {
    x.iter()
        .flat_map(|(a, p)| y.iter().map(move |(b, q)| (a * b, p.then(q))))
        .collect()
}

fn adjoint(x: &Sparse) -> Sparse {
    x.iter().map(|(a, p)| (a.conj(), p.adjoint())).collect()
}

fn trace(x: &Sparse) -> C64 {
    x.iter().map(|(a, p)| a * p.trace()).sum()
}

fn sparse_gram(kappa: f64, d: usize) -> GramMatrix {
    let m = choose_parameters(kappa, d).unwrap();
    let theta = PI * m as f64 / d as f64;
    let one = C64::new(1.0, 0.0);
    let clock = Monomial::diagonal(
        (0..d)
            .map(|j| C64::from_polar(1.0, TAU * j as f64 / d as f64))
            .collect(),
    );
    let flip = Monomial::permutation((0..d).map(|j| (d - j) % d).collect());
    let shifted = Monomial::permutation((0..d).map(|j| (2 * d - m - j) % d).collect());
    let s = [clock.then(&shifted), shifted.clone(), clock.adjoint().then(&flip), flip];
    let phase = C64::from_polar(1.0, theta);
    let sym: Vec<Sparse> = vec![
        vec![(phase, s[0].clone())],
        vec![(one, s[1].clone())],
        vec![(one, s[2].clone())],
        vec![(one, s[3].clone())],
    ];
    let half = |x: &Sparse| {
        let mut y: Sparse = x.iter().map(|(a, p)| (a * FRAC_1_SQRT_2, p.clone())).collect();
        y.push((C64::new(0.0, FRAC_1_SQRT_2), Monomial::identity(d)));
        y
    };
    let s12 = mul(&sym[0], &sym[1]);
    let u = [
        vec![(one, Monomial::identity(d))],
        sym[0].clone(),
        s12.clone(),
        mul(&s12, &sym[2]),
        half(&sym[0]),
        mul(&sym[0], &half(&sym[1])),
        mul(&s12, &half(&sym[2])),
        half(&sym[3]),
    ];
    let entries = nalgebra::DMatrix::from_fn(8, 8, |i, j| trace(&mul(&adjoint(&u[j]), &u[i])));
    GramMatrix::new(entries).unwrap()
}

const KAPPA: f64 = SQRT_2 - 1.0;

#[test]
fn large_dimension_oracle_confirms_limit() {
    let limit = limit_gram(KAPPA, 8).unwrap();
    let e2048 = sparse_gram(KAPPA, 2048).max_abs_diff(&limit).unwrap();
    let e4096 = sparse_gram(KAPPA, 4096).max_abs_diff(&limit).unwrap();
    assert!(e4096 <= 1e-2 && e2048 <= 1e-2, "{e2048} {e4096}");
    assert!(e4096 <= 0.5 * e2048 * (1.0 + 1e-9), "{e2048} {e4096}");
    let a = |i: usize, j: usize| limit.get(i - 1, j - 1);
    assert!((a(5, 1) - C64::new(0.0, FRAC_1_SQRT_2)).norm() <= 1e-15);
    assert!((a(8, 4) - C64::from_polar(FRAC_1_SQRT_2, -TAU * KAPPA)).norm() <= 1e-15);
    assert!(a(4, 1).norm() <= 1e-15);
}

#[test]
fn sparse_oracle_matches_dense_tuple_at_moderate_dimension() {
    for d in [16, 37, 64] {
        let dense = compute_gram(&build_witness_tuple(&WitnessSpec::new(KAPPA, 8, d).unwrap()).unwrap());
        assert!(dense.max_abs_diff(&sparse_gram(KAPPA, d)).unwrap() <= 1e-12, "d = {d}");
    }
}

#[test]
fn quadruples_are_exact_for_small_dimensions() {
    for d in [2, 4, 8, 16, 32] {
        for m in (0..d).filter(|m| gcd(*m, d) == 1) {
            let q = build_symmetries(d, m).unwrap();
            let r = q.check();
            assert!(r.holds(1e-12, 1e-8), "d = {d}, m = {m}: {r:?}");
        }
    }
}

#[test]
fn witness_entries_are_unitary_and_fourth_is_phase_times_flip() {
    for d in [5, 8, 33] {
        let spec = WitnessSpec::new(KAPPA, 10, d).unwrap();
        let t = build_witness_tuple(&spec).unwrap();
        for u in t.unitaries() {
            assert!(t.algebra().unitarity_defect(u).unwrap() <= 1e-12);
        }
        let q = spec.quadruple();
        let want = q.get(3) * C64::from_polar(1.0, q.theta());
        assert!((&t.unitaries()[3].blocks()[0] - want).norm() <= 1e-12);
        let g = compute_gram(&t);
        assert!((8..10).all(|k| (g.get(k, 0) - C64::new(1.0, 0.0)).norm() <= 1e-12));
    }
}

#[test]
fn convergence_is_first_order() {
    let limit = limit_gram(KAPPA, 8).unwrap();
    let errors: Vec<(usize, f64)> = [64, 128, 256, 512]
        .iter()
        .map(|&d| {
            let g = compute_gram(&build_witness_tuple(&WitnessSpec::new(KAPPA, 8, d).unwrap()).unwrap());
            (d, g.max_abs_diff(&limit).unwrap())
        })
        .collect();
    let c = errors[0].1 * 64.0;
    for w in errors.windows(2) {
        assert!(w[1].1 <= w[0].1, "{errors:?}");
    }
    for &(d, e) in &errors {
        assert!(e <= 1.5 * c / d as f64, "{errors:?}");
    }
}

#[test]
fn limit_certificate_is_saturated() {
    for kappa in [KAPPA, 0.1, 0.37] {
        let r = certificate(&limit_gram(kappa, 8).unwrap(), kappa).unwrap();
        assert!(r.passes && r.c.iter().all(|c| (c - 2.0).abs() <= 1e-9), "{r:?}");
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
