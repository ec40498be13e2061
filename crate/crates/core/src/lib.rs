//! Hard-constrained QAOA workbench for generalized mean-variance problems.
//!
//! The crate bundles a dense statevector simulator with trajectory-based
//! thermal noise ([`sim`], [`noise`]), the constrained ansatz ([`qaoa`]), the
//! problem encoding ([`gmvp`]), three derivative-free optimizers ([`optim`]),
//! and the two experiment pipelines built on them: pairwise landscape scans
//! ([`landscape`]) and the optimizer benchmark ([`bench`]).

// `!(x > 0.0)` guards reject NaN along with non-positive values, and dense
// matrix kernels read better with explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod error;
pub mod gmvp;
pub mod landscape;
pub mod noise;
pub mod optim;
pub mod qaoa;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
