//! Spheric diagonalization (SDIAG): a non-orthogonal least-squares joint
//! diagonalizer.
//!
//! Each iteration builds, for every column `b_n` of the current demixing
//! matrix, `M_n = Σ_k C_k b_n b_nᵀ C_k` and their sum `M`, whitens `M`
//! (`HᵀMH = I`), takes the principal eigenvector `u_n` of every whitened
//! `HᵀM_nH` and sets `B ← H·U`, finally rescaling the columns so that
//! `Σ_k (b_nᵀ C_k b_n)² = 1`. Fixed points of the scheme satisfy the nested
//! pencil equations `M_n b_n ∝ M b_n`, which are the stationarity conditions of
//! the off-criterion under that scale constraint.

mod criteria;
mod scheme;

pub use criteria::{
    column_energy, compute_m, compute_m_columns, compute_m_n, energy_balance, gamma_criterion, normalize_columns,
    off_criterion, stationarity_residual, sum_m, EnergyBalance, DEGENERATE_COLUMN_ENERGY,
};
pub use scheme::{
    optimal_directions, orthogonality_defect, sdiag_run, sdiag_step, sphering, theorem_diagnostics, Diagonalizer,
    Directions, EigStrategy, Init, SdiagConfig, SdiagReport, Sphering, StepOutput, TheoremDiagnostics,
};
