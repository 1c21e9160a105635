//! Finite-dimensional tracial algebras `⊕ₖ M_{d_k}` with the state
//! `τ(x) = Σₖ λₖ · tr(xₖ) / dₖ`, and operators stored one dense block per summand.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Block = DMatrix<C64>;

/// Weights whose sum lies within this distance of 1 are renormalized.
pub const WEIGHT_SUM_SLACK: f64 = 1e-9;

/// Base unitarity tolerance, multiplied by the largest block dimension.
pub const UNITARY_TOL_PER_DIM: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct TracialAlgebra {
    dims: Vec<usize>,
    weights: Vec<f64>,
}

/// Structural validation of an algebra. A zero-weight block makes the
/// trace non-faithful, which voids the self-adjointness conclusions drawn
/// by the certificate module.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgebraReport {
    pub faithful: bool,
    /// 1-based indices of blocks with weight exactly zero.
    pub zero_weight_blocks: Vec<usize>,
}

impl TracialAlgebra {
    pub fn new(dims: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        if dims.len() != weights.len() {
            return Err(Error::InvalidAlgebra(format!(
                "{} block dimensions but {} weights",
                dims.len(),
                weights.len()
            )));
        }
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidAlgebra(format!("block {} has dimension 0", k + 1)));
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidAlgebra(format!(
                "block {} has invalid weight {}",
                k + 1,
                weights[k]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_SLACK {
            return Err(Error::InvalidAlgebra(format!("weights sum to {total}, not 1")));
        }
        // Sums already within a few ulps of 1 are kept verbatim so that
        // serialized weights reload bit-for-bit.
        let weights = if (total - 1.0).abs() > 4.0 * f64::EPSILON {
            weights.into_iter().map(|w| w / total).collect()
        } else {
            weights
        };
        Ok(Self { dims, weights })
    }

    /// The full matrix algebra `M_d` with its normalized trace.
    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d], vec![1.0])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(1)
    }

    pub fn validate(&self) -> AlgebraReport {
        let zero_weight_blocks: Vec<usize> = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w == 0.0)
            .map(|(k, _)| k + 1)
            .collect();
        AlgebraReport {
            faithful: zero_weight_blocks.is_empty(),
            zero_weight_blocks,
        }
    }

    pub fn is_faithful(&self) -> bool {
        self.weights.iter().all(|w| *w > 0.0)
    }

    /// Default unitarity tolerance: `1e-10` scaled by the largest block dimension.
    pub fn default_unitary_tol(&self) -> f64 {
        UNITARY_TOL_PER_DIM * self.max_dim() as f64
    }

    pub fn conforms(&self, x: &BlockOperator) -> Result<()> {
        if x.blocks.len() != self.dims.len() {
            return Err(Error::Conformance(format!(
                "expected {} blocks, found {}",
                self.dims.len(),
                x.blocks.len()
            )));
        }
        for (k, (b, &d)) in x.blocks.iter().zip(&self.dims).enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::Conformance(format!(
                    "block {} is {}x{}, expected {d}x{d}",
                    k + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(())
    }

    pub fn identity(&self) -> BlockOperator {
        self.scalar(C64::new(1.0, 0.0))
    }

    pub fn zeros(&self) -> BlockOperator {
        self.scalar(C64::new(0.0, 0.0))
    }

    /// `z · I`.
    pub fn scalar(&self, z: C64) -> BlockOperator {
        BlockOperator {
            blocks: self.dims.iter().map(|&d| Block::identity(d, d) * z).collect(),
        }
    }

    pub fn trace(&self, x: &BlockOperator) -> Result<C64> {
        self.conforms(x)?;
        Ok(self.trace_unchecked(x))
    }

    pub(crate) fn trace_unchecked(&self, x: &BlockOperator) -> C64 {
        x.blocks
            .iter()
            .zip(&self.dims)
            .zip(&self.weights)
            .map(|((b, &d), &w)| b.trace() * (w / d as f64))
            .sum()
    }

    /// `τ(y* x)`, evaluated entrywise without forming the product.
    pub fn inner(&self, x: &BlockOperator, y: &BlockOperator) -> Result<C64> {
        self.conforms(x)?;
        self.conforms(y)?;
        Ok(self.inner_unchecked(x, y))
    }

    pub(crate) fn inner_unchecked(&self, x: &BlockOperator, y: &BlockOperator) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (k, (&d, &w)) in self.dims.iter().zip(&self.weights).enumerate() {
            let s: C64 = y.blocks[k]
                .iter()
                .zip(x.blocks[k].iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            acc += s * (w / d as f64);
        }
        acc
    }

    /// Largest operator-norm deviation `‖xₖ* xₖ − I‖` over the blocks.
    pub fn unitarity_defect(&self, x: &BlockOperator) -> Result<f64> {
        self.conforms(x)?;
        Ok(x.blocks.iter().map(block_unitarity_defect).fold(0.0, f64::max))
    }

    pub fn is_unitary(&self, x: &BlockOperator, tol: f64) -> Result<bool> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(self.unitarity_defect(x)? <= tol)
    }

    /// Largest deviation from being a self-adjoint unitary: the maximum of
    /// `‖x − x*‖_F` and the unitarity defect.
    pub fn symmetry_defect(&self, x: &BlockOperator) -> Result<f64> {
        let unitary = self.unitarity_defect(x)?;
        let hermitian = x.blocks.iter().map(|b| (b - b.adjoint()).norm()).fold(0.0, f64::max);
        Ok(unitary.max(hermitian))
    }

    /// `sqrt(Re τ((x−y)*(x−y)))`.
    pub fn hs_distance(&self, x: &BlockOperator, y: &BlockOperator) -> Result<f64> {
        let diff = x.sub(y)?;
        self.conforms(&diff)?;
        Ok(self.inner_unchecked(&diff, &diff).re.max(0.0).sqrt())
    }

    /// `(A ⊕ B, x₁ ⊕ x₂)` with weights `λ·weights(A)` followed by `(1−λ)·weights(B)`.
    pub fn direct_sum(
        &self,
        x1: &BlockOperator,
        other: &TracialAlgebra,
        x2: &BlockOperator,
        lambda: f64,
    ) -> Result<(TracialAlgebra, BlockOperator)> {
        let alg = self.direct_sum_algebra(other, lambda)?;
        self.conforms(x1)?;
        other.conforms(x2)?;
        Ok((alg, x1.direct_sum(x2)))
    }

    pub fn direct_sum_algebra(&self, other: &TracialAlgebra, lambda: f64) -> Result<TracialAlgebra> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight {lambda} outside [0, 1]"
            )));
        }
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        let weights = self
            .weights
            .iter()
            .map(|w| lambda * w)
            .chain(other.weights.iter().map(|w| (1.0 - lambda) * w))
            .collect();
        Ok(TracialAlgebra { dims, weights })
    }
}

impl fmt::Display for TracialAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .dims
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| format!("{w}·M_{d}"))
            .collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

pub(crate) fn block_unitarity_defect(b: &Block) -> f64 {
    let d = b.nrows();
    let dev = b.adjoint() * b - Block::identity(d, d);
    // Frobenius dominates the operator norm, so skip the eigensolve when it is already small.
    let frob = dev.norm();
    if frob <= 1e-14 {
        return frob;
    }
    dev.symmetric_eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// One dense complex matrix per block of the owning algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    blocks: Vec<Block>,
}

impl BlockOperator {
    pub fn new(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn single(block: Block) -> Self {
        Self { blocks: vec![block] }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * z).collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "multiply", |a, b| {
            if a.ncols() != b.nrows() {
                return None;
            }
            Some(a * b)
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| (a.shape() == b.shape()).then(|| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "subtract", |a, b| (a.shape() == b.shape()).then(|| a - b))
    }

    /// Block concatenation `x ⊕ y`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self {
            blocks: self.blocks.iter().chain(&other.blocks).cloned().collect(),
        }
    }

    fn zip_with(&self, other: &Self, what: &str, f: impl Fn(&Block, &Block) -> Option<Block>) -> Result<Self> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::Conformance(format!(
                "cannot {what}: {} blocks vs {} blocks",
                self.blocks.len(),
                other.blocks.len()
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .enumerate()
            .map(|(k, (a, b))| {
                f(a, b).ok_or_else(|| {
                    Error::Conformance(format!(
                        "cannot {what}: block {} shapes {:?} and {:?}",
                        k + 1,
                        a.shape(),
                        b.shape()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks })
    }
}
