//! Dense real linear algebra used throughout the crate.
//!
//! Everything here is written in-repo: a row-major [`Matrix`], a
//! [`SymmetricMatrix`] newtype, cyclic Jacobi and power-pass eigensolvers,
//! a one-sided Jacobi SVD, LU solves and Gram-Schmidt orthonormalization.

mod eig;
mod matrix;
mod solve;
mod svd;

pub use eig::{power_iteration, sym_eig, EigenDecomposition, PowerResult, JACOBI_MAX_SWEEPS, JACOBI_REL_TOL};
pub use matrix::{diag_norm2, dot, norm2, off_norm2, Matrix, SymmetricMatrix};
pub use solve::{inverse, qr_orthonormalize, solve_linear, PIVOT_REL_TOL};
pub use svd::{left_svd, LeftSvd};
