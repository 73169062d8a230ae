//! Approximate joint diagonalization of real symmetric matrix sets.
//!
//! * [`sdiag`]: spheric diagonalization, a non-orthogonal least-squares
//!   joint diagonalizer, with its criterion identities and diagnostics.
//! * [`ojd`]: an orthogonal Givens-rotation joint diagonalizer used as a
//!   baseline.
//! * [`simkit`]: simulated benchmark sets, the performance index and
//!   summary statistics.
//! * [`linalg`]: the dense linear algebra all of the above is built on.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod ojd;
pub mod sdiag;
mod set;
pub mod simkit;

pub use error::{Error, Result};
pub use linalg::{Matrix, SymmetricMatrix};
pub use set::MatrixSet;
