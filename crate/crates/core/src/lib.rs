//! Local discontinuous Galerkin solver for the one-dimensional tempered
//! fractional diffusion equation
//!
//! ```text
//! D_t^{α,γ} u + ρ u − u_xx = f,   x ∈ [a, b] periodic,  t ∈ (0, T]
//! ```
//!
//! Time is discretized with the tempered L1 rule ([`tempered`]) and space
//! with an LDG method using generalized alternating fluxes
//! `û = δ u^+ + (1 − δ) u^-`, `p̂ = (1 − δ) p^+ + δ p^-` ([`dg`]). The
//! [`solver`] eliminates the auxiliary variable `p = u_x` and reuses a single
//! Cholesky factorization for all time levels. [`study`] runs refinement and
//! stability sweeps and writes CSV tables.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
#[cfg(feature = "cli")]
pub mod cli;
pub mod dg;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod solver;
pub mod study;
pub mod tempered;
mod timing;

pub use error::{Error, Result};
