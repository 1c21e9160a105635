//! Symbolic words in the clock `D`, the shift `T = J·K` and the flip `J`.
//!
//! The relations used for normal ordering are
//!
//! ```text
//! D·T = e^{2iθ}·T·D,    J·D = D⁻¹·J,    J·T = T⁻¹·J,    J² = I,
//! ```
//!
//! so every word reduces to `z · D^q · T^k · J^r` with `r ∈ {0, 1}`. In
//! `M_d` with `θ = πm/d` these hold exactly for `D = diag(ω^j)`,
//! `J: e_j ↦ e_{−j}` and `T: e_j ↦ e_{j+m}`. As `d → ∞` with `gcd(m, d) = 1`
//! the normalized trace of every non-scalar monomial vanishes.

use std::collections::BTreeMap;
use std::ops::Add;

use crate::algebra::{Block, C64};

/// Exponents of `D^clock · T^shift · J^flip`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub clock: i64,
    pub shift: i64,
    pub flip: bool,
}

impl Monomial {
    pub const IDENTITY: Monomial = Monomial {
        clock: 0,
        shift: 0,
        flip: false,
    };
    pub const CLOCK: Monomial = Monomial {
        clock: 1,
        shift: 0,
        flip: false,
    };
    pub const SHIFT: Monomial = Monomial {
        clock: 0,
        shift: 1,
        flip: false,
    };
    pub const FLIP: Monomial = Monomial {
        clock: 0,
        shift: 0,
        flip: true,
    };

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

/// A finite linear combination of monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Word {
    terms: BTreeMap<Monomial, C64>,
}

impl Word {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coeff: C64, m: Monomial) -> Self {
        let mut w = Self::zero();
        w.push(coeff, m);
        w
    }

    pub fn scalar(z: C64) -> Self {
        Self::monomial(z, Monomial::IDENTITY)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, c)| (*m, c * z)).collect(),
        }
    }

    fn push(&mut self, coeff: C64, m: Monomial) {
        *self.terms.entry(m).or_insert(C64::new(0.0, 0.0)) += coeff;
    }
}

impl Add for &Word {
    type Output = Word;

    fn add(self, rhs: &Word) -> Word {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.push(*c, *m);
        }
        out
    }
}

/// Reduction rules for a fixed phase `θ`.
#[derive(Clone, Copy, Debug)]
pub struct WordAlgebra {
    theta: f64,
}

impl WordAlgebra {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `(z₁ D^{q₁} T^{k₁} J^{r₁}) · (z₂ D^{q₂} T^{k₂} J^{r₂})`, normal ordered.
    pub fn mul_monomials(&self, a: Monomial, b: Monomial) -> (C64, Monomial) {
        let s = if a.flip { -1 } else { 1 };
        // J^{r₁} moves right past D^{q₂} T^{k₂}, inverting both; then T^{k₁}
        // moves past D^{s·q₂} at the cost of e^{-2iθ·k₁·s·q₂}.
        let exponent = -2.0 * self.theta * (a.shift * s * b.clock) as f64;
        let m = Monomial {
            clock: a.clock + s * b.clock,
            shift: a.shift + s * b.shift,
            flip: a.flip ^ b.flip,
        };
        (C64::from_polar(1.0, exponent), m)
    }

    pub fn mul(&self, x: &Word, y: &Word) -> Word {
        let mut out = Word::zero();
        for (ma, ca) in &x.terms {
            for (mb, cb) in &y.terms {
                let (phase, m) = self.mul_monomials(*ma, *mb);
                out.push(ca * cb * phase, m);
            }
        }
        out
    }

    pub fn adjoint(&self, x: &Word) -> Word {
        let mut out = Word::zero();
        for (m, c) in &x.terms {
            // (D^q T^k J^r)* = J^r · T^{-k} · D^{-q}
            let flip = Monomial {
                flip: m.flip,
                ..Monomial::IDENTITY
            };
            let shift = Monomial {
                shift: -m.shift,
                ..Monomial::IDENTITY
            };
            let clock = Monomial {
                clock: -m.clock,
                ..Monomial::IDENTITY
            };
            let (p1, fm) = self.mul_monomials(flip, shift);
            let (p2, adj) = self.mul_monomials(fm, clock);
            out.push(c.conj() * p1 * p2, adj);
        }
        out
    }

    /// Trace in the `d → ∞` limit: the coefficient of the identity monomial.
    pub fn limit_trace(&self, x: &Word) -> C64 {
        x.terms.get(&Monomial::IDENTITY).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Exact normalized trace in `M_d` where `T` shifts by `m`.
    pub fn finite_trace(&self, x: &Word, d: usize, m: usize) -> C64 {
        x.terms.iter().map(|(mono, c)| c * monomial_trace(*mono, d, m)).sum()
    }

    /// Dense matrix of `x` in `M_d` where `T` shifts by `m`.
    pub fn to_matrix(&self, x: &Word, d: usize, m: usize) -> Block {
        let mut out = Block::zeros(d, d);
        for (mono, c) in &x.terms {
            for col in 0..d {
                let (row, phase) = monomial_action(*mono, d, m, col);
                out[(row, col)] += c * phase;
            }
        }
        out
    }
}

/// Image of `e_col` under `D^q T^k J^r` in `M_d`: `(row, phase)`.
fn monomial_action(mono: Monomial, d: usize, m: usize, col: usize) -> (usize, C64) {
    let d_i = d as i64;
    let s = if mono.flip { -1 } else { 1 };
    let row = (s * col as i64 + mono.shift * m as i64).rem_euclid(d_i);
    let phase_index = (mono.clock * row).rem_euclid(d_i);
    (
        row as usize,
        C64::from_polar(1.0, std::f64::consts::TAU * phase_index as f64 / d as f64),
    )
}

fn monomial_trace(mono: Monomial, d: usize, m: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for col in 0..d {
        let (row, phase) = monomial_action(mono, d, m, col);
        if row == col {
            acc += phase;
        }
    }
    acc / d as f64
}
