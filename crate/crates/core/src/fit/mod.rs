//! Membership probing: fit a unitary tuple in a fixed tracial algebra to a
//! target Gram matrix by Armijo descent on the product of unitary groups.
//!
//! The fitter only reports the best residual it found. A positive residual is
//! not a proof that the target lies outside the realizable set.

pub mod retraction;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Block, BlockOperator, TracialAlgebra, C64};
use crate::certificate::{certificate, CertificateReport};
use crate::error::{Error, Result};
use crate::gram::{compute_gram, gram_entries, GramMatrix, UnitaryTuple};
use retraction::{nearest_unitary, skew, Polar, Retraction};

/// Targets must pass Gram validation at this tolerance.
pub const TARGET_TOL: f64 = 1e-6;

pub const DEFAULT_MAX_ITER: usize = 5000;
pub const DEFAULT_GRAD_TOL: f64 = 1e-8;
pub const DEFAULT_RESTARTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmijoParams {
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitProblem {
    pub target: GramMatrix,
    pub shape: TracialAlgebra,
    pub n: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub restarts: usize,
    pub armijo: ArmijoParams,
    pub retraction: Arc<dyn Retraction>,
    /// Evaluate the certificate of the best tuple at this κ (needs n ≥ 8).
    pub kappa: Option<f64>,
}

impl FitProblem {
    pub fn new(target: GramMatrix, shape: TracialAlgebra) -> Self {
        let n = target.n();
        Self {
            target,
            shape,
            n,
            seed: 0,
            max_iter: DEFAULT_MAX_ITER,
            grad_tol: DEFAULT_GRAD_TOL,
            restarts: DEFAULT_RESTARTS,
            armijo: ArmijoParams::default(),
            retraction: Arc::new(Polar),
            kappa: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_grad_tol(mut self, grad_tol: f64) -> Self {
        self.grad_tol = grad_tol;
        self
    }

    pub fn with_retraction(mut self, retraction: Arc<dyn Retraction>) -> Self {
        self.retraction = retraction;
        self
    }

    pub fn with_kappa(mut self, kappa: Option<f64>) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != self.target.n() {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: self.target.n(),
            });
        }
        let report = self.target.validate(TARGET_TOL);
        if !report.passes {
            return Err(Error::InvalidGram(format!(
                "target fails validation: hermiticity {:.3e}, diagonal {:.3e}, min eigenvalue {:.3e}",
                report.hermiticity_defect, report.diagonal_defect, report.min_eigenvalue
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "invalid gradient tolerance {}",
                self.grad_tol
            )));
        }
        let a = &self.armijo;
        if !(a.initial_step > 0.0 && a.shrink > 0.0 && a.shrink < 1.0 && a.sufficient_decrease > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid Armijo parameters {a:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub tuple: UnitaryTuple,
    /// Frobenius distance between the achieved and the target Gram matrix.
    pub residual: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// 0-based index of the restart that produced `tuple`.
    pub restart: usize,
    pub restart_residuals: Vec<f64>,
    pub armijo: ArmijoParams,
    pub retraction: &'static str,
    pub certificate_at_kappa: Option<CertificateReport>,
}

/// Squared Frobenius misfit `Σ_{ij} |τ(U_j*U_i) − g[i][j]|²`.
pub fn objective(t: &UnitaryTuple, g: &GramMatrix) -> Result<f64> {
    if t.len() != g.n() {
        return Err(Error::LengthMismatch {
            left: t.len(),
            right: g.n(),
        });
    }
    Ok(misfit(t.algebra(), t.unitaries(), g))
}

fn residual_matrix(alg: &TracialAlgebra, ops: &[BlockOperator], g: &GramMatrix) -> nalgebra::DMatrix<C64> {
    gram_entries(alg, ops) - g.entries()
}

fn misfit(alg: &TracialAlgebra, ops: &[BlockOperator], g: &GramMatrix) -> f64 {
    residual_matrix(alg, ops, g).norm_squared()
}

/// Gradient of the objective in each `U_p` for the real inner product
/// `⟨X, Y⟩ = Re τ(Y*X)`:
/// `∇_p = 2·Σ_j (r[p][j] + conj(r[j][p]))·U_j` with `r = G(U) − g`.
pub fn euclidean_gradient(t: &UnitaryTuple, g: &GramMatrix) -> Result<Vec<BlockOperator>> {
    if t.len() != g.n() {
        return Err(Error::LengthMismatch {
            left: t.len(),
            right: g.n(),
        });
    }
    Ok(gradient(t.algebra(), t.unitaries(), g))
}

fn gradient(alg: &TracialAlgebra, ops: &[BlockOperator], g: &GramMatrix) -> Vec<BlockOperator> {
    let r = residual_matrix(alg, ops, g);
    let n = ops.len();
    (0..n)
        .map(|p| {
            let mut blocks: Vec<Block> = alg.dims().iter().map(|&d| Block::zeros(d, d)).collect();
            for (j, u) in ops.iter().enumerate() {
                let coeff = (r[(p, j)] + r[(j, p)].conj()) * 2.0;
                for (acc, b) in blocks.iter_mut().zip(u.blocks()) {
                    *acc += b * coeff;
                }
            }
            BlockOperator::new(blocks)
        })
        .collect()
}

/// Tangent projection `U·skew(U*G)` of each gradient component.
fn riemannian_gradient(ops: &[BlockOperator], egrad: &[BlockOperator]) -> Vec<BlockOperator> {
    ops.iter()
        .zip(egrad)
        .map(|(u, g)| {
            BlockOperator::new(
                u.blocks()
                    .iter()
                    .zip(g.blocks())
                    .map(|(ub, gb)| ub * skew(&(ub.adjoint() * gb)))
                    .collect(),
            )
        })
        .collect()
}

fn tangent_norm_sq(alg: &TracialAlgebra, xi: &[BlockOperator]) -> f64 {
    xi.iter().map(|x| alg.inner_unchecked(x, x).re).sum()
}

/// Haar-like random unitaries: polar factors of complex Gaussian blocks.
fn random_unitaries(alg: &TracialAlgebra, n: usize, rng: &mut ChaCha8Rng) -> Vec<BlockOperator> {
    (0..n)
        .map(|_| {
            let blocks = alg
                .dims()
                .iter()
                .map(|&d| {
                    let g = Block::from_fn(d, d, |_, _| {
                        C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
                    });
                    nearest_unitary(&g)
                })
                .collect();
            BlockOperator::new(blocks)
        })
        .collect()
}

pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ restart as u64)
}

struct Run {
    ops: Vec<BlockOperator>,
    value: f64,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
}

fn descend(p: &FitProblem, mut ops: Vec<BlockOperator>) -> Run {
    let alg = &p.shape;
    let armijo = &p.armijo;
    let mut value = misfit(alg, &ops, &p.target);
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < p.max_iter {
        let xi = riemannian_gradient(&ops, &gradient(alg, &ops, &p.target));
        let gsq = tangent_norm_sq(alg, &xi);
        grad_norm = gsq.sqrt();
        if grad_norm <= p.grad_tol {
            converged = true;
            break;
        }
        let mut step = armijo.initial_step;
        let mut accepted = None;
        for _ in 0..=armijo.max_backtracks {
            let candidate: Vec<BlockOperator> = ops
                .iter()
                .zip(&xi)
                .map(|(u, x)| {
                    BlockOperator::new(
                        u.blocks()
                            .iter()
                            .zip(x.blocks())
                            .map(|(ub, xb)| p.retraction.retract(ub, &(xb * C64::new(-step, 0.0))))
                            .collect(),
                    )
                })
                .collect();
            let cv = misfit(alg, &candidate, &p.target);
            if cv <= value - armijo.sufficient_decrease * step * gsq {
                accepted = Some((candidate, cv));
                break;
            }
            step *= armijo.shrink;
        }
        iterations += 1;
        match accepted {
            Some((candidate, cv)) => {
                ops = candidate;
                value = cv;
            }
            // No sufficient decrease along the gradient: numerically stationary.
            None => break,
        }
    }
    if !converged && iterations == p.max_iter {
        let xi = riemannian_gradient(&ops, &gradient(alg, &ops, &p.target));
        grad_norm = tangent_norm_sq(alg, &xi).sqrt();
        converged = grad_norm <= p.grad_tol;
    }
    Run {
        ops,
        value,
        iterations,
        grad_norm,
        converged,
    }
}

pub fn fit(p: &FitProblem) -> Result<FitResult> {
    fit_from(p, None)
}

/// Like [`fit`], with restart 0 started from `start` instead of a random point.
pub fn fit_from(p: &FitProblem, start: Option<&[BlockOperator]>) -> Result<FitResult> {
    p.validate()?;
    if let Some(s) = start {
        if s.len() != p.n {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: p.n,
            });
        }
        for u in s {
            p.shape.conforms(u)?;
        }
    }
    let runs: Vec<Run> = (0..p.restarts)
        .into_par_iter()
        .map(|r| {
            let init = match (r, start) {
                (0, Some(s)) => s.iter().map(polar_blocks).collect(),
                _ => random_unitaries(&p.shape, p.n, &mut restart_rng(p.seed, r)),
            };
            descend(p, init)
        })
        .collect();
    let restart_residuals: Vec<f64> = runs.iter().map(|r| r.value.max(0.0).sqrt()).collect();
    let (best_index, best) = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .expect("at least one restart");

    let ops: Vec<BlockOperator> = best.ops.iter().map(polar_blocks).collect();
    let tuple = UnitaryTuple::new(p.shape.clone(), ops)?;
    let residual = objective(&tuple, &p.target)?.sqrt();
    let mut certificate_at_kappa = match p.kappa {
        Some(kappa) if p.n >= 8 => Some(certificate(&compute_gram(&tuple), kappa)?),
        _ => None,
    };
    let report = p.shape.validate();
    if let Some(c) = certificate_at_kappa.as_mut().filter(|c| c.passes && !report.faithful) {
        c.implication = Some(format!(
            "trace on the fitted shape is not faithful (zero-weight blocks {:?}), so no self-adjointness conclusion follows",
            report.zero_weight_blocks
        ));
    }
    Ok(FitResult {
        tuple,
        residual,
        iterations: best.iterations,
        grad_norm: best.grad_norm,
        converged: best.converged,
        restart: best_index,
        restart_residuals,
        armijo: p.armijo,
        retraction: p.retraction.name(),
        certificate_at_kappa,
    })
}

fn polar_blocks(u: &BlockOperator) -> BlockOperator {
    BlockOperator::new(u.blocks().iter().map(nearest_unitary).collect())
}

/// `U ↦ U ⊕ U ⊕ … ⊕ U` (`copies` times) inside a single block.
pub fn embed_block_diagonal(u: &Block, copies: usize) -> Block {
    let d = u.nrows();
    let mut out = Block::zeros(d * copies, d * copies);
    for c in 0..copies {
        out.view_mut((c * d, c * d), (d, d)).copy_from(u);
    }
    out
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub retraction: Arc<dyn Retraction>,
    pub kappa: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            grad_tol: DEFAULT_GRAD_TOL,
            retraction: Arc::new(Polar),
            kappa: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub d: usize,
    pub residual: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// Certificate values of the achieved Gram matrix (n ≥ 8 only).
    pub certificate: Option<[f64; 4]>,
    pub result: FitResult,
}

/// Best residual per single-block dimension. When a dimension is a multiple
/// of the previous one, the previous solution embedded block-diagonally
/// (which preserves its Gram matrix) seeds restart 0, so residuals cannot
/// increase along such a chain.
pub fn residual_sweep(target: &GramMatrix, dims: &[usize], seed: u64, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one dimension".into()));
    }
    let mut rows: Vec<SweepRow> = Vec::with_capacity(dims.len());
    for &d in dims {
        let shape = TracialAlgebra::single(d)?;
        let problem = FitProblem::new(target.clone(), shape)
            .with_seed(seed)
            .with_restarts(opts.restarts)
            .with_max_iter(opts.max_iter)
            .with_grad_tol(opts.grad_tol)
            .with_retraction(opts.retraction.clone())
            .with_kappa(opts.kappa);
        let warm: Option<Vec<BlockOperator>> = rows.last().and_then(|prev| {
            let pd = prev.d;
            (d % pd == 0).then(|| {
                prev.result
                    .tuple
                    .unitaries()
                    .iter()
                    .map(|u| BlockOperator::single(embed_block_diagonal(&u.blocks()[0], d / pd)))
                    .collect()
            })
        });
        let result = fit_from(&problem, warm.as_deref())?;
        let certificate = result.certificate_at_kappa.as_ref().map(|c| c.c);
        rows.push(SweepRow {
            d,
            residual: result.residual,
            iterations: result.iterations,
            grad_norm: result.grad_norm,
            converged: result.converged,
            certificate,
            result,
        });
    }
    Ok(rows)
}

/// Random unitary tuple in `alg`, for planting targets and tests.
pub fn random_tuple(alg: &TracialAlgebra, n: usize, seed: u64) -> UnitaryTuple {
    let ops = random_unitaries(alg, n, &mut ChaCha8Rng::seed_from_u64(seed));
    UnitaryTuple::from_parts_unchecked(alg.clone(), ops)
}
