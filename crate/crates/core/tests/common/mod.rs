#![allow(dead_code)]

use corrlab::fit::retraction::nearest_unitary;
use corrlab::{Block, BlockOperator, TracialAlgebra, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(d: usize, rng: &mut ChaCha8Rng) -> Block {
    Block::from_fn(d, d, |_, _| {
        C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    })
}

pub fn unitary(d: usize, rng: &mut ChaCha8Rng) -> Block {
    nearest_unitary(&gaussian(d, rng))
}

/// `W·diag(±1)·W*` with random signs and Haar-like `W`.
pub fn symmetry(d: usize, rng: &mut ChaCha8Rng) -> Block {
    let w = unitary(d, rng);
    let signs = DVector::from_fn(d, |_, _| C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0));
    &w * Block::from_diagonal(&signs) * w.adjoint()
}

pub fn random_algebra(rng: &mut ChaCha8Rng, max_blocks: usize, max_dim: usize) -> TracialAlgebra {
    let k = rng.random_range(1..=max_blocks);
    let dims: Vec<usize> = (0..k).map(|_| rng.random_range(1..=max_dim)).collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    TracialAlgebra::new(dims, raw.iter().map(|w| w / s).collect()).unwrap()
}

pub fn operator(alg: &TracialAlgebra, rng: &mut ChaCha8Rng) -> BlockOperator {
    BlockOperator::new(alg.dims().iter().map(|&d| gaussian(d, rng)).collect())
}

pub fn unitary_op(alg: &TracialAlgebra, rng: &mut ChaCha8Rng) -> BlockOperator {
    BlockOperator::new(alg.dims().iter().map(|&d| unitary(d, rng)).collect())
}
