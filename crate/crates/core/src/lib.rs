//! Unitary correlation matrices `a[i][j] = τ(U_j* U_i)` over finite-dimensional
//! tracial algebras.
//!
//! The crate builds exact finite-dimensional symmetry quadruples and the
//! eight-unitary witness tuples made from them, computes their Gram matrices
//! and the limit those matrices converge to, evaluates the self-adjointness
//! certificates and the determinant obstruction, and fits unitary tuples to
//! arbitrary target matrices by descent on products of unitary groups.

pub mod algebra;
pub mod certificate;
pub mod error;
pub mod fit;
pub mod gram;
pub mod io;
pub mod pipeline;
pub mod witness;

pub use algebra::{Block, BlockOperator, TracialAlgebra, C64};
pub use error::{Error, Result};
pub use gram::{compute_gram, convex_combine, validate_gram, GramMatrix, GramReport, UnitaryTuple};
