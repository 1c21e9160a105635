//! Self-adjointness certificates and the determinant obstruction.
//!
//! For unitaries `U, V` in an algebra with tracial state `τ`,
//!
//! ```text
//! √2·Re τ(U*V) − Im τ(U − √2·V) = 2 − ½·τ(|U + iI − √2·V|²),
//! ```
//!
//! so the left side never exceeds 2, and under a faithful trace it equals 2
//! exactly when `V = (U + iI)/√2`, which forces `U = U*`. The four values read
//! off an 8×8 Gram matrix apply this to `V_j* V_{j+1}` (j = 1, 2, 3) and to
//! `e^{−2πiκ}·V₁* V₄`.

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::algebra::{BlockOperator, TracialAlgebra, C64};
use crate::error::{Error, Result};
use crate::gram::{GramMatrix, GRAM_TOL, TUPLE_UNITARY_TOL_PER_DIM};
use crate::witness::distance_to_sign;

/// Default tolerance on `|c_j − 2|`.
pub const CERT_TOL: f64 = 1e-9;

/// Symmetries handed to [`det_obstruction`] must be within this defect.
pub const SYMMETRY_TOL: f64 = 1e-8;

fn check_unitary(alg: &TracialAlgebra, x: &BlockOperator, index: usize) -> Result<()> {
    let tol = TUPLE_UNITARY_TOL_PER_DIM * alg.max_dim() as f64;
    let defect = alg.unitarity_defect(x)?;
    if !(defect <= tol) {
        return Err(Error::NotUnitary { index, defect, tol });
    }
    Ok(())
}

/// `√2·Re τ(U*V) − Im τ(U − √2·V)` for unitaries `U`, `V`.
pub fn lemma_value(alg: &TracialAlgebra, u: &BlockOperator, v: &BlockOperator) -> Result<f64> {
    check_unitary(alg, u, 1)?;
    check_unitary(alg, v, 2)?;
    let uv = alg.inner_unchecked(v, u);
    let tu = alg.trace_unchecked(u);
    let tv = alg.trace_unchecked(v);
    Ok(SQRT_2 * uv.re - (tu - tv * SQRT_2).im)
}

/// `|½·τ(X*X) − (2 + Re τ(−iU + √2·iV − √2·U*V))|` with `X = U + iI − √2·V`.
/// Zero up to rounding whenever `U` and `V` are unitary.
pub fn lemma_identity_defect(alg: &TracialAlgebra, u: &BlockOperator, v: &BlockOperator) -> Result<f64> {
    alg.conforms(u)?;
    alg.conforms(v)?;
    let i = C64::new(0.0, 1.0);
    let x = u.add(&alg.scalar(i))?.sub(&v.scale(C64::new(SQRT_2, 0.0)))?;
    let lhs = 0.5 * alg.trace_unchecked(&x.adjoint().multiply(&x)?).re;
    let inner = u
        .scale(-i)
        .add(&v.scale(i * SQRT_2))?
        .sub(&u.adjoint().multiply(v)?.scale(C64::new(SQRT_2, 0.0)))?;
    let rhs = 2.0 + alg.trace_unchecked(&inner).re;
    Ok((lhs - rhs).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub kappa: f64,
    pub c: [f64; 4],
    /// `Σ_j (2 − c_j)`.
    pub deficiency: f64,
    pub tol: f64,
    pub passes: bool,
    /// Set when `passes`: the consequence for a finite-dimensional realization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implication: Option<String>,
}

/// The four certificate values on the leading 8×8 block of `g`, without
/// validating `g`. Indices below are 1-based.
pub fn certificate_values(g: &GramMatrix, kappa: f64) -> Result<[f64; 4]> {
    if g.n() < 8 {
        return Err(Error::InvalidGram(format!("certificates need n >= 8, got {}", g.n())));
    }
    let a = |i: usize, j: usize| g.get(i - 1, j - 1);
    let mut c = [0.0; 4];
    for j in 1..=3 {
        c[j - 1] = SQRT_2 * a(j + 4, j + 1).re - (a(j + 1, j) - a(j + 4, j) * SQRT_2).im;
    }
    let phase = C64::from_polar(1.0, TAU * kappa);
    c[3] = SQRT_2 * (phase * a(8, 4)).re - (phase.conj() * a(4, 1) - a(8, 1) * SQRT_2).im;
    Ok(c)
}

pub fn certificate(g: &GramMatrix, kappa: f64) -> Result<CertificateReport> {
    certificate_with_tol(g, kappa, CERT_TOL)
}

pub fn certificate_with_tol(g: &GramMatrix, kappa: f64, tol: f64) -> Result<CertificateReport> {
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must be finite, got {kappa}")));
    }
    let c = certificate_values(g, kappa)?;
    let validation = g.validate(GRAM_TOL);
    if !validation.passes {
        return Err(Error::InvalidGram(format!(
            "hermiticity defect {:.3e}, diagonal defect {:.3e}, min eigenvalue {:.3e}",
            validation.hermiticity_defect, validation.diagonal_defect, validation.min_eigenvalue
        )));
    }
    let deficiency = c.iter().map(|cj| 2.0 - cj).sum();
    let passes = c.iter().all(|cj| (cj - 2.0).abs() <= tol);
    let implication = passes.then(|| {
        format!(
            "if V1..V8 realize this matrix in a finite-dimensional algebra with faithful trace, then \
             V1*V2, V2*V3, V3*V4 and exp(-2πi·{kappa})·V1*V4 are self-adjoint unitaries whose product \
             equals exp(2πi·{kappa})·I; on a block M_d its determinant exp(2πi·{kappa}·d) must be ±1, \
             which fails for every d when κ is irrational"
        )
    });
    Ok(CertificateReport {
        kappa,
        c,
        deficiency,
        tol,
        passes,
        implication,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeterminantReport {
    pub dims: Vec<usize>,
    /// Per block, the product of the determinants of the inputs.
    pub per_block: Vec<C64>,
    /// `max_k dist(per_block[k], {±1})`.
    pub sign_defect: f64,
}

impl DeterminantReport {
    /// Could the product of the inputs equal `e^{2πiκ}·I`? `false` once
    /// some block's determinant differs from `e^{2πiκ·d}` by more than `tol`.
    pub fn admits_scalar(&self, kappa: f64, tol: f64) -> bool {
        self.dims.iter().zip(&self.per_block).all(|(&d, det)| {
            let want = C64::from_polar(1.0, TAU * (kappa * d as f64).rem_euclid(1.0));
            (det - want).norm() <= tol
        })
    }
}

/// Per-block determinant of the product of `symmetries`.
pub fn det_obstruction(symmetries: &[BlockOperator], alg: &TracialAlgebra) -> Result<DeterminantReport> {
    let mut per_block = vec![C64::new(1.0, 0.0); alg.num_blocks()];
    for (i, s) in symmetries.iter().enumerate() {
        let defect = alg.symmetry_defect(s)?;
        if !(defect <= SYMMETRY_TOL) {
            return Err(Error::NotSymmetry {
                index: i + 1,
                defect,
                tol: SYMMETRY_TOL,
            });
        }
        for (acc, b) in per_block.iter_mut().zip(s.blocks()) {
            *acc *= b.clone().determinant();
        }
    }
    let sign_defect = per_block.iter().map(|z| distance_to_sign(*z)).fold(0.0, f64::max);
    Ok(DeterminantReport {
        dims: alg.dims().to_vec(),
        per_block,
        sign_defect,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFactorization {
    /// Block `block` (1-based) of dimension `dim` has `det(e^{2πiκ}I) ∉ {±1}`;
    /// `distance` is `dist(dκ mod 1, {0, ½})`.
    Excluded { block: usize, dim: usize, distance: f64 },
    /// Every block admits determinant ±1 for `e^{2πiκ}I` within tolerance.
    NotExcluded,
}

/// Can `e^{2πiκ}·I` be a finite product of symmetries in `⊕ M_{d_k}`? Any
/// such product has determinant ±1 on every block, while
/// `det(e^{2πiκ}I_d) = e^{2πiκd}`.
pub fn scalar_factorization(dims: &[usize], kappa: f64, tol: f64) -> ScalarFactorization {
    for (k, &d) in dims.iter().enumerate() {
        let frac = (kappa * d as f64).rem_euclid(1.0);
        let distance = frac.min((frac - 0.5).abs()).min(1.0 - frac);
        if distance > tol {
            return ScalarFactorization::Excluded {
                block: k + 1,
                dim: d,
                distance,
            };
        }
    }
    ScalarFactorization::NotExcluded
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Block;
    use crate::witness::build_symmetries;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z2(alg: &TracialAlgebra) -> (BlockOperator, BlockOperator) {
        let u = BlockOperator::single(Block::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(-1.0, 0.0),
        ])));
        let v = u.add(&alg.scalar(c(0.0, 1.0))).unwrap().scale(c(FRAC_1_SQRT_2, 0.0));
        (u, v)
    }

    #[test]
    fn lemma_value_examples() {
        let alg = TracialAlgebra::single(2).unwrap();
        let (u, v) = z2(&alg);
        assert!((lemma_value(&alg, &u, &v).unwrap() - 2.0).abs() < 1e-15);

        let id = alg.identity();
        assert!((lemma_value(&alg, &id, &id).unwrap() - SQRT_2).abs() < 1e-15);

        let i = alg.scalar(c(0.0, 1.0));
        let want = 2.0 * SQRT_2 - 1.0;
        assert!((lemma_value(&alg, &i, &i).unwrap() - want).abs() < 1e-15);

        let bad = id.scale(c(2.0, 0.0));
        assert!(matches!(
            lemma_value(&alg, &id, &bad),
            Err(Error::NotUnitary { index: 2, .. })
        ));
    }

    #[test]
    fn identity_defect_examples() {
        let alg = TracialAlgebra::single(2).unwrap();
        let id = alg.identity();
        assert!(lemma_identity_defect(&alg, &id, &id).unwrap() < 1e-12);
        let (u, v) = z2(&alg);
        assert!(lemma_identity_defect(&alg, &u, &v).unwrap() < 1e-12);
        let other = TracialAlgebra::single(3).unwrap();
        assert!(lemma_identity_defect(&other, &u, &v).is_err());
    }

    #[test]
    fn all_ones_certificate() {
        let c = certificate(&GramMatrix::ones(8), 0.0).unwrap();
        for j in 0..3 {
            assert!((c.c[j] - SQRT_2).abs() < 1e-12);
        }
        assert!(!c.passes);
        assert!(c.implication.is_none());
        assert!(c.deficiency > 0.0);
    }

    #[test]
    fn certificate_rejects_bad_input() {
        assert!(certificate(&GramMatrix::ones(7), 0.0).is_err());
        let mut bad = GramMatrix::ones(8).into_entries();
        bad[(0, 1)] = c(3.0, 0.0);
        assert!(matches!(
            certificate(&GramMatrix::new(bad).unwrap(), 0.0),
            Err(Error::InvalidGram(_))
        ));
    }

    #[test]
    fn determinant_examples() {
        let alg = TracialAlgebra::single(3).unwrap();
        let r = det_obstruction(&vec![alg.identity(); 4], &alg).unwrap();
        assert!((r.per_block[0] - c(1.0, 0.0)).norm() < 1e-15);

        for (d, m) in [(2, 1), (4, 1)] {
            let q = build_symmetries(d, m).unwrap();
            let r = det_obstruction(q.symmetries(), &q.algebra()).unwrap();
            assert!((r.per_block[0] - c(-1.0, 0.0)).norm() < 1e-12, "d={d}");
            assert!(r.sign_defect < 1e-12);
            // The product is e^{iπm/d}·I, so κ = m/(2d) is admitted.
            assert!(r.admits_scalar(m as f64 / (2 * d) as f64, 1e-8));
            assert!(!r.admits_scalar(2f64.sqrt() - 1.0, 1e-8));
        }

        let not_sym = alg.scalar(c(0.0, 1.0));
        assert!(matches!(
            det_obstruction(&[not_sym], &alg),
            Err(Error::NotSymmetry { index: 1, .. })
        ));
    }

    #[test]
    fn scalar_factorization_examples() {
        assert_eq!(
            scalar_factorization(&[4], 0.125, 1e-9),
            ScalarFactorization::NotExcluded
        );
        assert!(matches!(
            scalar_factorization(&[2, 3], 0.25, 1e-9),
            ScalarFactorization::Excluded { block: 2, dim: 3, .. }
        ));
        assert!(matches!(
            scalar_factorization(&[7], 2f64.sqrt() - 1.0, 1e-8),
            ScalarFactorization::Excluded { .. }
        ));
    }
}
