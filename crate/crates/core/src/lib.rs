//! Static Einstein–Vlasov matter shells around a Schwarzschild black hole.
//!
//! The crate is organised bottom-up:
//!
//! - [`potential`]: Schwarzschild effective potential, turning points and
//!   orbit classification.
//! - [`geodesics`]: RK4 integration of radial motion.
//! - [`ansatz`]: the distribution-function profile and cut-offs.
//! - [`matter`]: energy density and pressures as integrals over `(E, l)`.
//! - [`solver`]: Picard iteration for the metric potential `mu`.
//! - [`validation`]: residual checks and fault injection.
//! - [`config`], [`output`], [`cli`]: run configuration, deterministic files
//!   and the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ansatz;
pub mod cli;
pub mod config;
pub mod error;
pub mod geodesics;
pub mod matter;
pub mod metric;
pub mod output;
pub mod potential;
pub mod quadrature;
pub mod solver;
pub mod validation;

pub use error::{Result, ShellError};
