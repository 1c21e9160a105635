//! Correlation (Gram) matrices `a[i][j] = τ(U_j* U_i)` of unitary tuples.
//!
//! Storage is 0-based; every report and error message uses 1-based indices.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{BlockOperator, TracialAlgebra, C64};
use crate::error::{Error, Result};

/// Tuple entries must be unitary to `1e-8` times the largest block dimension.
pub const TUPLE_UNITARY_TOL_PER_DIM: f64 = 1e-8;

/// Default tolerance for [`validate_gram`] on computed Gram matrices.
pub const GRAM_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct UnitaryTuple {
    alg: TracialAlgebra,
    unitaries: Vec<BlockOperator>,
    near_unitary: Vec<usize>,
}

impl UnitaryTuple {
    pub fn new(alg: TracialAlgebra, unitaries: Vec<BlockOperator>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::InvalidParameter(
                "a unitary tuple needs at least one entry".into(),
            ));
        }
        let strict = alg.default_unitary_tol();
        let tol = TUPLE_UNITARY_TOL_PER_DIM * alg.max_dim() as f64;
        let mut near_unitary = Vec::new();
        for (i, u) in unitaries.iter().enumerate() {
            alg.conforms(u).map_err(|e| match e {
                Error::Conformance(msg) => Error::Conformance(format!("operator {}: {msg}", i + 1)),
                other => other,
            })?;
            let defect = alg.unitarity_defect(u)?;
            if !(defect <= tol) {
                return Err(Error::NotUnitary {
                    index: i + 1,
                    defect,
                    tol,
                });
            }
            if defect > strict {
                near_unitary.push(i + 1);
            }
        }
        Ok(Self {
            alg,
            unitaries,
            near_unitary,
        })
    }

    pub(crate) fn from_parts_unchecked(alg: TracialAlgebra, unitaries: Vec<BlockOperator>) -> Self {
        Self {
            alg,
            unitaries,
            near_unitary: Vec::new(),
        }
    }

    pub fn algebra(&self) -> &TracialAlgebra {
        &self.alg
    }

    pub fn unitaries(&self) -> &[BlockOperator] {
        &self.unitaries
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// 1-based indices of entries whose unitarity defect exceeds the strict
    /// per-dimension tolerance but stays within the tuple tolerance.
    pub fn near_unitary(&self) -> &[usize] {
        &self.near_unitary
    }

    pub fn into_parts(self) -> (TracialAlgebra, Vec<BlockOperator>) {
        (self.alg, self.unitaries)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<C64>,
}

impl GramMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidGram(format!(
                "expected a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            entries: DMatrix::from_element(n, n, C64::new(1.0, 0.0)),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// 0-based entry `a[i][j]`.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn validate(&self, tol: f64) -> GramReport {
        report_for(&self.entries, tol)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &GramMatrix) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::LengthMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Frobenius distance `‖self − other‖_F`.
    pub fn frobenius_distance(&self, other: &GramMatrix) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::LengthMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok((&self.entries - &other.entries).norm())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramReport {
    pub n: usize,
    pub tol: f64,
    /// `max |a[j][i] − conj(a[i][j])|`.
    pub hermiticity_defect: f64,
    /// `max |a[i][i] − 1|`.
    pub diagonal_defect: f64,
    /// Smallest eigenvalue of the Hermitian part `(a + a†)/2`.
    pub min_eigenvalue: f64,
    pub passes: bool,
}

pub fn validate_gram(entries: &DMatrix<C64>, tol: f64) -> Result<GramReport> {
    if entries.nrows() != entries.ncols() {
        return Err(Error::InvalidGram(format!(
            "non-square {}x{} matrix",
            entries.nrows(),
            entries.ncols()
        )));
    }
    Ok(report_for(entries, tol))
}

fn report_for(a: &DMatrix<C64>, tol: f64) -> GramReport {
    let n = a.nrows();
    let mut hermiticity_defect = 0.0f64;
    let mut diagonal_defect = 0.0f64;
    for i in 0..n {
        diagonal_defect = diagonal_defect.max((a[(i, i)] - C64::new(1.0, 0.0)).norm());
        for j in 0..n {
            hermiticity_defect = hermiticity_defect.max((a[(j, i)] - a[(i, j)].conj()).norm());
        }
    }
    let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let min_eigenvalue = if n == 0 {
        0.0
    } else {
        sym.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    let passes = hermiticity_defect <= tol && diagonal_defect <= tol && min_eigenvalue >= -tol;
    GramReport {
        n,
        tol,
        hermiticity_defect,
        diagonal_defect,
        min_eigenvalue,
        passes,
    }
}

/// `a[i][j] = τ(U_j* U_i)`.
pub fn compute_gram(t: &UnitaryTuple) -> GramMatrix {
    GramMatrix {
        entries: gram_entries(&t.alg, &t.unitaries),
    }
}

/// Validates `unitaries` as a tuple and returns its Gram matrix.
pub fn gram_of(alg: &TracialAlgebra, unitaries: &[BlockOperator]) -> Result<GramMatrix> {
    let t = UnitaryTuple::new(alg.clone(), unitaries.to_vec())?;
    Ok(compute_gram(&t))
}

/// Gram entries for conforming operators; no unitarity check. Each entry is
/// computed on its own, so the result does not depend on evaluation order.
pub(crate) fn gram_entries(alg: &TracialAlgebra, ops: &[BlockOperator]) -> DMatrix<C64> {
    let n = ops.len();
    DMatrix::from_fn(n, n, |i, j| alg.inner_unchecked(&ops[i], &ops[j]))
}

/// Entrywise direct sum of two tuples, weighted `λ` and `1 − λ`. Its Gram
/// matrix is `λ·G(t1) + (1−λ)·G(t2)`.
pub fn convex_combine(t1: &UnitaryTuple, t2: &UnitaryTuple, lambda: f64) -> Result<UnitaryTuple> {
    if t1.len() != t2.len() {
        return Err(Error::LengthMismatch {
            left: t1.len(),
            right: t2.len(),
        });
    }
    let alg = t1.alg.direct_sum_algebra(&t2.alg, lambda)?;
    let unitaries = t1
        .unitaries
        .iter()
        .zip(&t2.unitaries)
        .map(|(x, y)| x.direct_sum(y))
        .collect();
    let mut near_unitary: Vec<usize> = t1.near_unitary.iter().chain(&t2.near_unitary).copied().collect();
    near_unitary.sort_unstable();
    near_unitary.dedup();
    Ok(UnitaryTuple {
        alg,
        unitaries,
        near_unitary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Block;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z2() -> BlockOperator {
        BlockOperator::single(Block::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(-1.0, 0.0),
        ])))
    }

    #[test]
    fn all_identity_gives_all_ones() {
        let alg = TracialAlgebra::single(2).unwrap();
        let t = UnitaryTuple::new(alg.clone(), vec![alg.identity(); 3]).unwrap();
        let g = compute_gram(&t);
        assert!(g.max_abs_diff(&GramMatrix::ones(3)).unwrap() < 1e-15);
    }

    #[test]
    fn identity_and_z_are_orthogonal() {
        let alg = TracialAlgebra::single(2).unwrap();
        let t = UnitaryTuple::new(alg.clone(), vec![alg.identity(), z2()]).unwrap();
        assert!(compute_gram(&t).max_abs_diff(&GramMatrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn non_unitary_entry_is_named() {
        let alg = TracialAlgebra::single(2).unwrap();
        let bad = alg.identity().scale(c(0.5, 0.0));
        let err = UnitaryTuple::new(alg.clone(), vec![alg.identity(), alg.identity(), bad]).unwrap_err();
        assert!(matches!(err, Error::NotUnitary { index: 3, .. }), "{err}");
        assert!(UnitaryTuple::new(alg, vec![]).is_err());
    }

    #[test]
    fn near_unitary_entries_are_flagged() {
        let alg = TracialAlgebra::single(2).unwrap();
        let slightly_off = alg.identity().scale(c(1.0 + 1e-9, 0.0));
        let t = UnitaryTuple::new(alg.clone(), vec![alg.identity(), slightly_off]).unwrap();
        assert_eq!(t.near_unitary(), &[2]);
    }

    #[test]
    fn validate_examples() {
        assert!(GramMatrix::identity(3).validate(1e-10).passes);
        assert!(GramMatrix::ones(5).validate(1e-10).passes);

        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let r = validate_gram(&m, 1e-8).unwrap();
        assert!(!r.passes);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
        assert_eq!(r.hermiticity_defect, 0.0);

        let rect = DMatrix::from_element(2, 3, c(0.0, 0.0));
        assert!(validate_gram(&rect, 1e-8).is_err());
        assert!(GramMatrix::new(rect).is_err());
    }

    #[test]
    fn convex_combination_examples() {
        let alg = TracialAlgebra::single(2).unwrap();
        let t1 = UnitaryTuple::new(alg.clone(), vec![alg.identity(), alg.identity()]).unwrap();
        let t2 = UnitaryTuple::new(alg.clone(), vec![alg.identity(), z2()]).unwrap();

        let g1 = compute_gram(&t1);
        let whole = compute_gram(&convex_combine(&t1, &t2, 1.0).unwrap());
        assert!(whole.max_abs_diff(&g1).unwrap() < 1e-15);

        let half = compute_gram(&convex_combine(&t1, &t2, 0.5).unwrap());
        let want = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
        assert!(half.max_abs_diff(&GramMatrix::new(want).unwrap()).unwrap() < 1e-15);

        let t3 = UnitaryTuple::new(alg.clone(), vec![alg.identity()]).unwrap();
        assert!(matches!(
            convex_combine(&t1, &t3, 0.5),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(convex_combine(&t1, &t2, -0.1).is_err());
    }
}
