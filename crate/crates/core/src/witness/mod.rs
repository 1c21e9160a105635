//! Exact symmetry quadruples with scalar product `e^{iθ}·I`, the eight-unitary
//! witness tuple built from them, and its `d → ∞` Gram matrix.
//!
//! In `M_d` let `D = diag(ω^j)` with `ω = e^{2πi/d}`, `J: e_j ↦ e_{−j}` and
//! `K: e_j ↦ e_{a−j}` with `a = d − m`. Then `J·D·J = D*` and
//! `K·D·K = ω^{−m}·D*`, so with `θ = πm/d`
//!
//! ```text
//! S₁ = e^{iθ}·D·K,   S₂ = K,   S₃ = D*·J,   S₄ = J
//! ```
//!
//! are unitary involutions with `S₁S₂ = e^{iθ}D`, `S₃S₄ = D*` and
//! `S₁S₂S₃S₄ = e^{iθ}·I`.

pub mod words;

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::DMatrix;

use crate::algebra::{Block, BlockOperator, TracialAlgebra, C64};
use crate::error::{Error, Result};
use crate::gram::{GramMatrix, UnitaryTuple};
use words::{Monomial, Word, WordAlgebra};

/// Number of unitaries carrying the construction; longer tuples pad with `I`.
pub const WITNESS_CORE_LEN: usize = 8;

#[derive(Clone, Debug)]
pub struct ClockFlip {
    pub clock: Block,
    pub flip: Block,
    pub shifted_flip: Block,
}

/// `(D, J, K)` for dimension `d` and phase index `m` (taken mod `d` for `K`).
pub fn build_clock_flip(d: usize, m: usize) -> Result<ClockFlip> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    let a = (d - m % d) % d;
    let clock = Block::from_fn(d, d, |i, j| if i == j { root_of_unity(i, d) } else { zero() });
    let flip = permutation(d, |j| (d - j) % d);
    let shifted_flip = permutation(d, |j| (a + d - j) % d);
    Ok(ClockFlip {
        clock,
        flip,
        shifted_flip,
    })
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn root_of_unity(k: usize, d: usize) -> C64 {
    C64::from_polar(1.0, TAU * (k % d) as f64 / d as f64)
}

/// Matrix sending `e_j` to `e_{σ(j)}`.
fn permutation(d: usize, sigma: impl Fn(usize) -> usize) -> Block {
    let mut p = Block::zeros(d, d);
    for j in 0..d {
        p[(sigma(j), j)] = C64::new(1.0, 0.0);
    }
    p
}

#[derive(Clone, Debug)]
pub struct SymmetryQuadruple {
    d: usize,
    m: usize,
    symmetries: [BlockOperator; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadrupleReport {
    /// `max_i ‖S_i − S_i*‖_F`.
    pub hermitian_defect: f64,
    /// `max_i ‖S_i² − I‖_F`.
    pub involution_defect: f64,
    /// `‖S₁S₂S₃S₄ − e^{iθ}I‖_F`.
    pub product_defect: f64,
    pub determinants: [C64; 4],
    /// `max_i dist(det S_i, {±1})`.
    pub determinant_defect: f64,
}

impl QuadrupleReport {
    pub fn holds(&self, tol: f64, det_tol: f64) -> bool {
        self.hermitian_defect <= tol
            && self.involution_defect <= tol
            && self.product_defect <= tol
            && self.determinant_defect <= det_tol
    }
}

/// Accepts `0 ≤ m < 2d`; indices `m ≥ d` negate `S₁`, which reaches the
/// phases `θ ∈ [π, 2π)`.
pub fn build_symmetries(d: usize, m: usize) -> Result<SymmetryQuadruple> {
    if m >= 2 * d {
        return Err(Error::InvalidParameter(format!(
            "phase index {m} outside [0, {})",
            2 * d
        )));
    }
    let cf = build_clock_flip(d, m)?;
    let theta = PI * m as f64 / d as f64;
    let s1 = (&cf.clock * &cf.shifted_flip) * C64::from_polar(1.0, theta);
    let s2 = cf.shifted_flip.clone();
    let s3 = cf.clock.adjoint() * &cf.flip;
    let s4 = cf.flip;
    Ok(SymmetryQuadruple {
        d,
        m,
        symmetries: [s1, s2, s3, s4].map(BlockOperator::single),
    })
}

impl SymmetryQuadruple {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn phase_index(&self) -> usize {
        self.m
    }

    /// `θ = πm/d`.
    pub fn theta(&self) -> f64 {
        PI * self.m as f64 / self.d as f64
    }

    pub fn algebra(&self) -> TracialAlgebra {
        TracialAlgebra::single(self.d).expect("d >= 2")
    }

    pub fn symmetries(&self) -> &[BlockOperator; 4] {
        &self.symmetries
    }

    pub fn get(&self, i: usize) -> &Block {
        &self.symmetries[i].blocks()[0]
    }

    pub fn product(&self) -> Block {
        self.get(0) * self.get(1) * self.get(2) * self.get(3)
    }

    pub fn check(&self) -> QuadrupleReport {
        let id = Block::identity(self.d, self.d);
        let mut hermitian_defect = 0.0f64;
        let mut involution_defect = 0.0f64;
        let mut determinants = [zero(); 4];
        let mut determinant_defect = 0.0f64;
        for (i, det) in determinants.iter_mut().enumerate() {
            let s = self.get(i);
            hermitian_defect = hermitian_defect.max((s - s.adjoint()).norm());
            involution_defect = involution_defect.max((s * s - &id).norm());
            *det = s.clone().determinant();
            determinant_defect = determinant_defect.max(distance_to_sign(*det));
        }
        let product_defect = (self.product() - &id * C64::from_polar(1.0, self.theta())).norm();
        QuadrupleReport {
            hermitian_defect,
            involution_defect,
            product_defect,
            determinants,
            determinant_defect,
        }
    }
}

pub(crate) fn distance_to_sign(z: C64) -> f64 {
    (z - C64::new(1.0, 0.0)).norm().min((z + C64::new(1.0, 0.0)).norm())
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Phase index `m ∈ [0, 2d)` with `gcd(m, d) = 1` whose phase `πm/d` is
/// closest to `2πκ` on the circle; ties go to the smaller `m`.
pub fn choose_parameters(kappa: f64, d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must be finite, got {kappa}")));
    }
    let period = 2 * d;
    let target = (2.0 * kappa * d as f64).rem_euclid(period as f64);
    let mut best: Option<(f64, usize)> = None;
    for m in (0..period).filter(|&m| gcd(m, d) == 1) {
        let gap = (m as f64 - target).abs();
        let dist = gap.min(period as f64 - gap);
        if best.is_none_or(|(b, _)| dist < b) {
            best = Some((dist, m));
        }
    }
    Ok(best.expect("1 is coprime to every d").1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSpec {
    pub kappa: f64,
    pub n: usize,
    pub dim: usize,
}

impl WitnessSpec {
    pub fn new(kappa: f64, n: usize, dim: usize) -> Result<Self> {
        if n < WITNESS_CORE_LEN {
            return Err(Error::InvalidParameter(format!("witness tuples need n >= 8, got {n}")));
        }
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "witness dimension must be >= 2, got {dim}"
            )));
        }
        if !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be finite, got {kappa}")));
        }
        Ok(Self { kappa, n, dim })
    }

    pub fn phase_index(&self) -> usize {
        choose_parameters(self.kappa, self.dim).expect("validated spec")
    }

    pub fn quadruple(&self) -> SymmetryQuadruple {
        build_symmetries(self.dim, self.phase_index()).expect("validated spec")
    }
}

/// `U₁ = I, U₂ = S₁, U₃ = S₁S₂, U₄ = S₁S₂S₃, U₅ = (S₁+iI)/√2,
/// U₆ = S₁(S₂+iI)/√2, U₇ = S₁S₂(S₃+iI)/√2, U₈ = (S₄+iI)/√2`, then `I`.
pub fn build_witness_tuple(spec: &WitnessSpec) -> Result<UnitaryTuple> {
    let spec = WitnessSpec::new(spec.kappa, spec.n, spec.dim)?;
    witness_from_quadruple(&spec.quadruple(), spec.n)
}

pub fn witness_from_quadruple(q: &SymmetryQuadruple, n: usize) -> Result<UnitaryTuple> {
    if n < WITNESS_CORE_LEN {
        return Err(Error::InvalidParameter(format!("witness tuples need n >= 8, got {n}")));
    }
    let d = q.dim();
    let id = Block::identity(d, d);
    let half = |x: Block| (x + &id * C64::new(0.0, 1.0)) * C64::new(FRAC_1_SQRT_2, 0.0);
    let (s1, s2, s3, s4) = (q.get(0), q.get(1), q.get(2), q.get(3));
    let s12 = s1 * s2;
    let s123 = &s12 * s3;
    let mut ops = vec![
        id.clone(),
        s1.clone(),
        s12.clone(),
        s123,
        half(s1.clone()),
        s1 * half(s2.clone()),
        &s12 * half(s3.clone()),
        half(s4.clone()),
    ];
    ops.resize(n, id);
    UnitaryTuple::new(q.algebra(), ops.into_iter().map(BlockOperator::single).collect())
}

/// The witness unitaries as symbolic words at phase `θ`.
pub fn witness_words(alg: &WordAlgebra) -> Vec<Word> {
    let one = C64::new(1.0, 0.0);
    let i_half = Word::scalar(C64::new(0.0, FRAC_1_SQRT_2));
    let mono = |m: Monomial| Word::monomial(one, m);
    // K = T⁻¹·J in normal order.
    let k = mono(Monomial {
        clock: 0,
        shift: -1,
        flip: true,
    });
    let s1 = alg.mul(&Word::monomial(C64::from_polar(1.0, alg.theta()), Monomial::CLOCK), &k);
    let s2 = k;
    let s3 = mono(Monomial {
        clock: -1,
        shift: 0,
        flip: true,
    });
    let s4 = mono(Monomial::FLIP);
    let half = |w: &Word| &w.scale(C64::new(FRAC_1_SQRT_2, 0.0)) + &i_half;
    let s12 = alg.mul(&s1, &s2);
    vec![
        Word::scalar(one),
        s1.clone(),
        s12.clone(),
        alg.mul(&s12, &s3),
        half(&s1),
        alg.mul(&s1, &half(&s2)),
        alg.mul(&s12, &half(&s3)),
        half(&s4),
    ]
}

fn word_gram(alg: &WordAlgebra, n: usize, trace: impl Fn(&Word) -> C64) -> DMatrix<C64> {
    let mut words = witness_words(alg);
    words.resize(n, Word::scalar(C64::new(1.0, 0.0)));
    let adjoints: Vec<Word> = words.iter().map(|w| alg.adjoint(w)).collect();
    DMatrix::from_fn(n, n, |i, j| trace(&alg.mul(&adjoints[j], &words[i])))
}

/// The `d → ∞` limit of the witness Gram matrices at phase `2πκ`.
pub fn limit_gram(kappa: f64, n: usize) -> Result<GramMatrix> {
    if n < WITNESS_CORE_LEN {
        return Err(Error::InvalidParameter(format!(
            "limit Gram matrix needs n >= 8, got {n}"
        )));
    }
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must be finite, got {kappa}")));
    }
    let alg = WordAlgebra::new((TAU * kappa).rem_euclid(TAU));
    GramMatrix::new(word_gram(&alg, n, |w| alg.limit_trace(w)))
}

/// Exact witness Gram matrix in `M_d` at phase index `m`, evaluated
/// symbolically rather than from dense matrices.
pub fn finite_word_gram(d: usize, m: usize, n: usize) -> Result<GramMatrix> {
    if n < WITNESS_CORE_LEN || d < 2 || m >= 2 * d {
        return Err(Error::InvalidParameter(format!(
            "invalid witness parameters d={d}, m={m}, n={n}"
        )));
    }
    let alg = WordAlgebra::new(PI * m as f64 / d as f64);
    GramMatrix::new(word_gram(&alg, n, |w| alg.finite_trace(w, d, m)))
}
