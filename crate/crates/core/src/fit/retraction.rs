//! Retractions from tangent steps back onto the unitary group, registered by
//! name so callers can pick one at runtime.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{Block, C64};
use crate::error::{Error, Result};

pub trait Retraction: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Maps `point + step`, with `point` unitary and `step` tangent at
    /// `point`, to a unitary.
    fn retract(&self, point: &Block, step: &Block) -> Block;
}

/// Unitary factor of the polar decomposition: the nearest unitary in
/// Frobenius norm.
pub fn nearest_unitary(m: &Block) -> Block {
    if m.nrows() == 1 {
        let z = m[(0, 0)];
        let r = z.norm();
        let u = if r > 0.0 { z / r } else { C64::new(1.0, 0.0) };
        return Block::from_element(1, 1, u);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V*");
    u * v_t
}

/// `skew(A) = (A − A*)/2`.
pub fn skew(a: &Block) -> Block {
    (a - a.adjoint()) * C64::new(0.5, 0.0)
}

/// `U ↦ polar(U + ξ)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Polar;

impl Retraction for Polar {
    fn name(&self) -> &'static str {
        "polar"
    }

    fn retract(&self, point: &Block, step: &Block) -> Block {
        nearest_unitary(&(point + step))
    }
}

/// `U ↦ U·exp(skew(U*ξ))`, the group exponential.
#[derive(Clone, Copy, Debug, Default)]
pub struct Exponential;

impl Retraction for Exponential {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn retract(&self, point: &Block, step: &Block) -> Block {
        let omega = skew(&(point.adjoint() * step));
        // Ω = −iH with H = iΩ Hermitian, so exp(Ω) = V·diag(e^{−iλ})·V*.
        let h = &omega * C64::new(0.0, 1.0);
        let eig = h.symmetric_eigen();
        let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, -l));
        let v = &eig.eigenvectors;
        let exp = v * Block::from_diagonal(&phases) * v.adjoint();
        // Re-project to absorb eigensolver rounding.
        nearest_unitary(&(point * exp))
    }
}

#[derive(Clone, Debug, Default)]
pub struct RetractionRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Retraction>>,
}

impl RetractionRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `polar` and `exponential`.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(Polar));
        reg.register(Arc::new(Exponential));
        reg
    }

    /// Adds `r` under its name, returning any entry it replaced.
    pub fn register(&mut self, r: Arc<dyn Retraction>) -> Option<Arc<dyn Retraction>> {
        self.entries.insert(r.name(), r)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Retraction>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown retraction '{name}' (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize) -> (Block, Block) {
        let m = Block::from_fn(d, d, |i, j| {
            C64::new((i * 3 + j) as f64 * 0.37 - 1.0, (i as f64 - j as f64) * 0.21)
        });
        let u = nearest_unitary(&m);
        let raw = Block::from_fn(d, d, |i, j| C64::new(0.01 * (i + 2 * j) as f64, -0.02 * i as f64));
        let step = &u * skew(&(u.adjoint() * raw));
        (u, step)
    }

    #[test]
    fn nearest_unitary_is_unitary_and_fixes_unitaries() {
        let (u, _) = sample(4);
        assert!((u.adjoint() * &u - Block::identity(4, 4)).norm() < 1e-13);
        assert!((nearest_unitary(&u) - &u).norm() < 1e-13);
        let z = Block::from_element(1, 1, C64::new(3.0, 4.0));
        assert!((nearest_unitary(&z)[(0, 0)] - C64::new(0.6, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn retractions_agree_to_first_order() {
        let (u, step) = sample(3);
        let polar = Polar.retract(&u, &step);
        let expo = Exponential.retract(&u, &step);
        for r in [&polar, &expo] {
            assert!((r.adjoint() * r - Block::identity(3, 3)).norm() < 1e-12);
            assert!((r - (&u + &step)).norm() < 10.0 * step.norm().powi(2));
        }
        assert!((Polar.retract(&u, &(step.clone() * C64::new(0.0, 0.0))) - &u).norm() < 1e-13);
    }

    #[test]
    fn registry_lookup() {
        let reg = RetractionRegistry::builtin();
        assert_eq!(reg.names(), vec!["exponential", "polar"]);
        assert_eq!(reg.get("polar").unwrap().name(), "polar");
        assert!(reg.get("cayley").is_err());
        let mut reg = RetractionRegistry::empty();
        assert!(reg.register(Arc::new(Polar)).is_none());
        assert!(reg.register(Arc::new(Polar)).is_some());
    }
}
