//! epslab: a desk-scale laboratory for the screened semilinear problem
//!
//! ```text
//! -eps^2 Lap u + q(x) u = f(u),   q(x) >= a^2 > 0,
//! ```
//!
//! built around its Green's-function fixed point. The crate provides
//!
//! - grids, fields and a transform facility ([`field`]),
//! - potential and nonlinearity families with exact ball bounds
//!   ([`problem`]),
//! - contraction certificates `(R, gamma)` and radius search
//!   ([`certificate`]),
//! - the Yukawa kernel, the periodic spectral Green action, and the
//!   Dirichlet finite-difference resolvent ([`greens`]),
//! - Picard iteration for the fixed point, the algebraic limiting
//!   equation `q(x) u = f(u)`, the rescaled frozen-coefficient solve, and
//!   the computable gap bound between the two ([`solver`]),
//! - vanishing-eps sweeps with log-log rate fits ([`study`]),
//! - a CSV-emitting command-line front end ([`cli`]).

pub mod certificate;
pub mod cli;
pub mod error;
pub mod field;
pub mod greens;
pub mod problem;
pub mod solver;
pub mod study;

pub use error::{Error, Result};
