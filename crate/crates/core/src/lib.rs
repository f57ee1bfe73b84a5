//! Subgraph counts in random geometric graphs built over Poisson point
//! processes.
//!
//! The crate is organised bottom-up:
//!
//! * [`ppp`] samples Poisson processes on bounded windows by thinning and
//!   answers integrability / truncation questions for the power-law family.
//! * [`geograph`] builds geometric graphs over a uniform grid index.
//! * [`motif`] counts non-induced copies of a small connected template and
//!   checks the local-count inequality `Σ F(x,ξ)² ≤ c_d F(ξ)^{(2k-1)/k}`.
//! * [`bounds`] evaluates the explicit constants and the four tail bounds.
//! * [`moments`] evaluates expectation and variance integrals by Monte Carlo
//!   integration, together with their small-radius limits.
//! * [`cli`] wires everything into reproducible experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod geograph;
pub mod moments;
pub mod motif;
pub mod ppp;
pub mod rng;

pub use error::{Error, Result};
