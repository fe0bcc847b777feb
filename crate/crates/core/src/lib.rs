//! Finite-dimensional machinery for matricial microstates of hyperfinite
//! tracial algebras: dimension invariants, trace-approximating embeddings,
//! unitary conjugacy of representations, quotient metrics on `U_k/H`, and
//! packing and freeness experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod embed;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod microstates;
pub mod suite;

pub use error::{Error, Result};

/// Library version, recorded in every experiment report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
