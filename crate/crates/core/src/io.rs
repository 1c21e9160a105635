//! JSON file formats for operators and Gram matrices.
//!
//! Operators:
//! `{ "algebra": { "blocks": [ { "dim": d, "weight": w }, ... ] },
//!    "operators": [ [ <block matrix>, ... ], ... ] }`
//! where a block matrix is a row-major array of `[re, im]` pairs of length `dim²`.
//!
//! Gram matrices: `{ "n": n, "entries": [ [re, im], ... ] }`, row-major with
//! `entries[i*n + j] = a[i][j] = τ(U_j* U_i)` (0-based storage).
//!
//! Both accept an optional `"meta"` object that is carried through untouched.
//! Floats are written in shortest round-trip form, so load/save is byte-stable.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{Block, BlockOperator, TracialAlgebra, C64};
use crate::error::{Error, Result};
use crate::gram::GramMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub dim: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub blocks: Vec<BlockSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub algebra: AlgebraJson,
    pub operators: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramFile {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn block_to_rows(b: &Block) -> Vec<[f64; 2]> {
    let d = b.nrows();
    (0..d).flat_map(|i| (0..d).map(move |j| pair(&b[(i, j)]))).collect()
}

impl AlgebraJson {
    pub fn from_algebra(alg: &TracialAlgebra) -> Self {
        Self {
            blocks: alg
                .dims()
                .iter()
                .zip(alg.weights())
                .map(|(&dim, &weight)| BlockSpec { dim, weight })
                .collect(),
        }
    }

    pub fn to_algebra(&self) -> Result<TracialAlgebra> {
        TracialAlgebra::new(
            self.blocks.iter().map(|b| b.dim).collect(),
            self.blocks.iter().map(|b| b.weight).collect(),
        )
    }
}

impl OperatorFile {
    pub fn from_parts(alg: &TracialAlgebra, ops: &[BlockOperator]) -> Self {
        Self {
            algebra: AlgebraJson::from_algebra(alg),
            operators: ops
                .iter()
                .map(|op| op.blocks().iter().map(block_to_rows).collect())
                .collect(),
            meta: None,
        }
    }

    pub fn with_meta(mut self, meta: Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn to_parts(&self) -> Result<(TracialAlgebra, Vec<BlockOperator>)> {
        let alg = self.algebra.to_algebra()?;
        let ops = self
            .operators
            .iter()
            .enumerate()
            .map(|(i, blocks)| {
                if blocks.len() != alg.num_blocks() {
                    return Err(Error::Format(format!(
                        "operator {} has {} blocks, algebra has {}",
                        i + 1,
                        blocks.len(),
                        alg.num_blocks()
                    )));
                }
                let mats = blocks
                    .iter()
                    .zip(alg.dims())
                    .enumerate()
                    .map(|(k, (entries, &d))| {
                        if entries.len() != d * d {
                            return Err(Error::Format(format!(
                                "operator {} block {}: expected {} entries, found {}",
                                i + 1,
                                k + 1,
                                d * d,
                                entries.len()
                            )));
                        }
                        Ok(Block::from_row_iterator(
                            d,
                            d,
                            entries.iter().map(|[re, im]| C64::new(*re, *im)),
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(BlockOperator::new(mats))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((alg, ops))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }
}

impl GramFile {
    pub fn from_gram(g: &GramMatrix) -> Self {
        let n = g.n();
        let entries = (0..n).flat_map(|i| (0..n).map(move |j| pair(&g.get(i, j)))).collect();
        Self { n, entries, meta: None }
    }

    pub fn with_meta(mut self, meta: Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn to_gram(&self) -> Result<GramMatrix> {
        if self.n == 0 || self.entries.len() != self.n * self.n {
            return Err(Error::Format(format!(
                "n = {} needs {} entries, found {}",
                self.n,
                self.n * self.n,
                self.entries.len()
            )));
        }
        GramMatrix::new(DMatrix::from_row_iterator(
            self.n,
            self.n,
            self.entries.iter().map(|[re, im]| C64::new(*re, *im)),
        ))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }
}
