use rayon::prelude::*;

use super::criteria::{normalize_columns, off_criterion, stationarity_residual};
use crate::error::{Error, Result};
use crate::linalg::{left_svd, norm2, power_iteration, qr_orthonormalize, sym_eig, LeftSvd, Matrix, SymmetricMatrix};
use crate::set::MatrixSet;

/// How the principal eigenvector of each whitened `HᵀM_nH` is found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EigStrategy {
    /// Full Jacobi eigendecomposition.
    #[default]
    FullEig,
    /// Warm-started power passes, falling back to `FullEig` when they stall.
    PowerPasses,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum Init {
    #[default]
    Identity,
    /// Square, nonsingular starting guess; normalized before the first step.
    Matrix(Matrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdiagConfig {
    /// Eigenvalues of `M` at or below `λ_max(M)/f` are dropped by the sphering.
    pub f: f64,
    pub max_iterations: usize,
    /// Stop when `√off` changes by at most `rel_tol · max(√off₀, ε)` between
    /// iterations. The root is the Frobenius norm of the stacked off-diagonal
    /// parts, which moves linearly with the error in `B`.
    pub rel_tol: f64,
    pub eig_strategy: EigStrategy,
    pub power_pass_cap: usize,
    pub power_tol: f64,
    pub init: Init,
    /// Compute the per-direction work of a step on the rayon pool.
    pub parallel: bool,
}

impl Default for SdiagConfig {
    fn default() -> Self {
        SdiagConfig {
            // Only numerically rank-deficient directions are truncated. Small
            // values such as 100 drop well-determined columns whenever the
            // mixing is ill-conditioned, since eig(M) spreads like cond(A)⁴.
            f: 1e12,
            max_iterations: 1000,
            rel_tol: 1e-12,
            eig_strategy: EigStrategy::FullEig,
            power_pass_cap: 25,
            power_tol: 1e-10,
            init: Init::Identity,
            parallel: false,
        }
    }
}

impl SdiagConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f > 1.0) {
            return Err(Error::InvalidConfig(format!("f must exceed 1, got {}", self.f)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.power_pass_cap == 0 {
            return Err(Error::InvalidConfig("power_pass_cap must be at least 1".into()));
        }
        if !(self.power_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "power_tol must be positive, got {}",
                self.power_tol
            )));
        }
        Ok(())
    }
}

/// Result of whitening `M`: `HᵀMH = I_R`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sphering {
    /// `N×R`.
    pub h: Matrix,
    pub rank: usize,
    /// Full spectrum of `M`, descending.
    pub eigenvalues: Vec<f64>,
}

/// Whitens a positive semidefinite `M`, keeping the `R` eigen-directions
/// whose eigenvalues exceed `λ_max/f` (always at least the top one).
pub fn sphering(m: &SymmetricMatrix, f: f64) -> Result<Sphering> {
    if !(f > 1.0) {
        return Err(Error::InvalidConfig(format!("f must exceed 1, got {f}")));
    }
    let eig = sym_eig(m)?;
    let lambda_max = eig.values[0];
    if !(lambda_max > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "sphering: largest eigenvalue of M is {lambda_max:e}; the set annihilates every direction"
        )));
    }
    let cut = lambda_max / f;
    let rank = eig.values.iter().take_while(|&&l| l > cut).count().max(1);
    let n = m.dim();
    let h = Matrix::from_fn(n, rank, |i, j| eig.vectors[(i, j)] / eig.values[j].sqrt());
    Ok(Sphering {
        h,
        rank,
        eigenvalues: eig.values,
    })
}

/// Principal directions of the whitened matrices, one per retained column.
#[derive(Clone, Debug, PartialEq)]
pub struct Directions {
    /// `R×R`; column `j` is the unit principal eigenvector for `selected[j]`.
    pub u: Matrix,
    /// Columns of the previous `B` whose `M_n` define `U`, ascending.
    pub selected: Vec<usize>,
    /// `λ₁(HᵀM_nH)` for each selected column.
    pub top_eigenvalues: Vec<f64>,
    /// `tr(HᵀM_nH)` for every column of the previous `B`.
    pub traces: Vec<f64>,
    /// Number of power-pass solves that fell back to the full eigensolver.
    pub power_fallbacks: usize,
}

/// Finds the principal eigenvector `u_n` of every `HᵀM_nH`, with `M_n`
/// taken from the columns of `b_prev`.
pub fn optimal_directions(h: &Matrix, c: &MatrixSet, b_prev: &Matrix, cfg: &SdiagConfig) -> Result<Directions> {
    c.check_rows("optimal_directions", b_prev)?;
    if h.rows() != c.n() {
        return Err(Error::dims("optimal_directions (H rows)", c.n(), h.rows()));
    }
    let f = factor(c, b_prev, cfg.parallel);
    let z = h.tr_matmul(&f);
    directions_from(&z, c.k(), &f, b_prev, cfg)
}

// `F = [C_1·b_1 … C_K·b_1  C_1·b_2 …]`, so that `M_n = F_n·F_nᵀ` for the
// `K`-column block `F_n` and `M = F·Fᵀ`.
fn factor(c: &MatrixSet, b: &Matrix, parallel: bool) -> Matrix {
    let products: Vec<Matrix> = if parallel {
        c.matrices().par_iter().map(|ck| ck.as_matrix().matmul(b)).collect()
    } else {
        c.iter().map(|ck| ck.as_matrix().matmul(b)).collect()
    };
    let k = c.k();
    Matrix::from_fn(c.n(), b.cols() * k, |i, col| products[col % k][(i, col / k)])
}

// `G_n·G_nᵀ` for the `K`-column block `G_n` of `z = HᵀF`, i.e. `HᵀM_nH`.
fn whitened_block(z: &Matrix, k: usize, n: usize) -> SymmetricMatrix {
    let mut w = SymmetricMatrix::zeros(z.rows());
    let mut col = vec![0.0; z.rows()];
    for j in n * k..(n + 1) * k {
        for (i, x) in col.iter_mut().enumerate() {
            *x = z[(i, j)];
        }
        w.add_outer(&col);
    }
    w
}

// `z = HᵀF` and `f = F` are expressed in the same coordinates as `b_prev`.
fn directions_from(z: &Matrix, k: usize, f: &Matrix, b_prev: &Matrix, cfg: &SdiagConfig) -> Result<Directions> {
    let r = z.rows();
    let cols = z.cols() / k;
    let whiten = |n: usize| whitened_block(z, k, n);
    let whitened: Vec<SymmetricMatrix> = if cfg.parallel {
        (0..cols).into_par_iter().map(whiten).collect()
    } else {
        (0..cols).map(whiten).collect()
    };
    let traces: Vec<f64> = whitened.iter().map(|w| w.trace()).collect();

    let selected: Vec<usize> = if r >= whitened.len() {
        (0..whitened.len()).collect()
    } else {
        let mut order: Vec<usize> = (0..whitened.len()).collect();
        order.sort_by(|&a, &b| traces[b].total_cmp(&traces[a]).then(a.cmp(&b)));
        let mut keep = order[..r].to_vec();
        keep.sort_unstable();
        keep
    };
    if selected.len() < r {
        return Err(Error::dims(
            "optimal_directions",
            format!("at least {r} columns in B"),
            selected.len(),
        ));
    }

    let solve = |&n: &usize| -> Result<(Vec<f64>, f64, bool)> {
        match cfg.eig_strategy {
            EigStrategy::FullEig => {
                let e = sym_eig(&whitened[n])?;
                Ok((e.vectors.column(0), e.values[0], false))
            }
            EigStrategy::PowerPasses => {
                // b_n expressed in the current whitened basis: Hᵀ·M·b_n = z·Fᵀ·b_n.
                let mut start = z.matvec(&f.tr_matvec(&b_prev.column(n)));
                if norm2(&start) == 0.0 {
                    start = vec![1.0; r];
                }
                match power_iteration(&whitened[n], &start, cfg.power_pass_cap, cfg.power_tol) {
                    Ok(p) => Ok((p.vector, p.eigenvalue, false)),
                    Err(Error::NoConvergence { .. }) => {
                        let e = sym_eig(&whitened[n])?;
                        Ok((e.vectors.column(0), e.values[0], true))
                    }
                    Err(e) => Err(e),
                }
            }
        }
    };
    let solved: Vec<(Vec<f64>, f64, bool)> = if cfg.parallel {
        selected.par_iter().map(solve).collect::<Result<_>>()?
    } else {
        selected.iter().map(solve).collect::<Result<_>>()?
    };

    let mut u = Matrix::zeros(r, r);
    let mut top_eigenvalues = Vec::with_capacity(r);
    let mut power_fallbacks = 0;
    for (j, (vec, val, fell_back)) in solved.into_iter().enumerate() {
        u.set_column(j, &vec);
        top_eigenvalues.push(val);
        power_fallbacks += usize::from(fell_back);
    }
    Ok(Directions {
        u,
        selected,
        top_eigenvalues,
        traces,
        power_fallbacks,
    })
}

/// `max_ij |UᵀU − I|`.
pub fn orthogonality_defect(u: &Matrix) -> f64 {
    u.tr_matmul(u).max_abs_diff(&Matrix::identity(u.cols()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub b_next: Matrix,
    pub h: Matrix,
    pub u: Matrix,
    pub rank: usize,
    /// `Σ_n tr(HᵀM_nH)` over all columns of the input `B`; equals `rank`.
    pub trace_sum: f64,
    pub top_eigenvalues: Vec<f64>,
    pub u_orth_defect: f64,
    pub power_fallbacks: usize,
}

// The whitened problem of one iteration, built from the factor `F` of `M`
// rather than from `M` itself: the sphering comes from the singular pairs of
// `F` and the whitened `HᵀM_nH` from blocks of `HᵀF`, which keeps directions
// with small eigenvalues of `M` accurate.
//
// When `B` is square and `M` keeps full rank, everything is expressed in the
// coordinates of `B`: with `T_k = BᵀC_kB` the local factor is `Bᵀ·F` and the
// sphering matrix of the original problem is `B·h`. This is the same
// iteration, but near a solution `BᵀMB` is almost diagonal and its sphering
// loses far less precision than sphering `M` itself.
struct Whitened {
    h: Matrix,
    /// `hᵀ·f`, `rank` rows.
    z: Matrix,
    /// `F` in the working coordinates.
    f: Matrix,
    /// `B` in the working coordinates.
    b_local: Matrix,
    /// `Some(B)` when working in the coordinates of `B`.
    basis: Option<Matrix>,
    rank: usize,
}

impl Whitened {
    fn to_original(&self, x: &Matrix) -> Matrix {
        match &self.basis {
            Some(b) => b.matmul(x),
            None => x.clone(),
        }
    }
}

// `H = U_R·Σ_R⁻¹` and `Z = HᵀF = Σ_R⁻¹·(UᵀF)_R` from the SVD of `F`.
fn whiten_rank(svd: &LeftSvd, rank: usize) -> (Matrix, Matrix) {
    let n = svd.vectors.rows();
    let h = Matrix::from_fn(n, rank, |i, j| svd.vectors[(i, j)] / svd.values[j]);
    let z = Matrix::from_fn(rank, svd.rotated.cols(), |i, j| svd.rotated[(i, j)] / svd.values[i]);
    (h, z)
}

fn whitened_problem(c: &MatrixSet, b: &Matrix, cfg: &SdiagConfig) -> Result<Whitened> {
    let f = factor(c, b, cfg.parallel);
    let svd = left_svd(&f)?;
    let lambda_max = svd.values[0] * svd.values[0];
    if !(lambda_max > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "sphering: largest eigenvalue of M is {lambda_max:e}; the set annihilates every direction"
        )));
    }
    // M can have more than `b.cols()` significant directions once columns of
    // B have been dropped; only the leading ones are kept.
    let cut = lambda_max / cfg.f;
    let rank = svd
        .values
        .iter()
        .take_while(|&&s| s * s > cut)
        .count()
        .clamp(1, b.cols());
    if b.is_square() && rank == b.cols() {
        let f_local = b.tr_matmul(&f);
        let local = left_svd(&f_local)?;
        let n = b.cols();
        let floor = local.values[0] * local.values[0] * f64::EPSILON * n as f64;
        let smallest = local.values[n - 1];
        if smallest * smallest > floor {
            let (h, z) = whiten_rank(&local, n);
            return Ok(Whitened {
                h,
                z,
                f: f_local,
                b_local: Matrix::identity(n),
                basis: Some(b.clone()),
                rank,
            });
        }
    }
    let (h, z) = whiten_rank(&svd, rank);
    Ok(Whitened {
        h,
        z,
        f,
        b_local: b.clone(),
        basis: None,
        rank,
    })
}

/// One SDIAG iteration: build `M_n` and `M`, sphere `M`, take the principal
/// whitened directions and map them back with `B ← normalize(H·U)`.
pub fn sdiag_step(c: &MatrixSet, b: &Matrix, cfg: &SdiagConfig) -> Result<StepOutput> {
    c.check_rows("sdiag_step", b)?;
    let w = whitened_problem(c, b, cfg)?;
    let dirs = directions_from(&w.z, c.k(), &w.f, &w.b_local, cfg)?;
    let raw = w.to_original(&w.h.matmul(&dirs.u));
    if !raw.is_finite() {
        return Err(Error::NonFinite { context: "sdiag_step" });
    }
    let b_next = normalize_columns(c, &raw)?;
    Ok(StepOutput {
        b_next,
        trace_sum: dirs.traces.iter().sum(),
        u_orth_defect: orthogonality_defect(&dirs.u),
        top_eigenvalues: dirs.top_eigenvalues,
        power_fallbacks: dirs.power_fallbacks,
        rank: w.rank,
        h: w.to_original(&w.h),
        u: dirs.u,
    })
}

/// Eigen-structure of the whitened matrices at a given `(H, B, U)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremDiagnostics {
    /// `Σ_n tr(HᵀM_nH)`; equals `R` whenever `HᵀMH = I_R`.
    pub trace_sum: f64,
    /// `max |UᵀU − I|`; vanishes at an exact joint diagonalizer.
    pub u_orth_defect: f64,
    /// `λ₁(HᵀM_nH)` per column of `B`; tends to 1 at an exact solution.
    pub top_eigenvalues: Vec<f64>,
    /// `λ₂(HᵀM_nH)` per column of `B` (0 when `R = 1`); tends to 0.
    pub second_eigenvalues: Vec<f64>,
}

pub fn theorem_diagnostics(h: &Matrix, c: &MatrixSet, b: &Matrix, u: &Matrix) -> Result<TheoremDiagnostics> {
    c.check_rows("theorem_diagnostics", b)?;
    if h.rows() != c.n() {
        return Err(Error::dims("theorem_diagnostics (H rows)", c.n(), h.rows()));
    }
    diagnostics_from(&h.tr_matmul(&factor(c, b, false)), c.k(), u)
}

fn diagnostics_from(z: &Matrix, k: usize, u: &Matrix) -> Result<TheoremDiagnostics> {
    let cols = z.cols() / k;
    let mut trace_sum = 0.0;
    let mut top = Vec::with_capacity(cols);
    let mut second = Vec::with_capacity(cols);
    for n in 0..cols {
        let w = whitened_block(z, k, n);
        trace_sum += w.trace();
        let e = sym_eig(&w)?;
        top.push(e.values[0]);
        second.push(e.values.get(1).copied().unwrap_or(0.0));
    }
    Ok(TheoremDiagnostics {
        trace_sum,
        u_orth_defect: orthogonality_defect(u),
        top_eigenvalues: top,
        second_eigenvalues: second,
    })
}

/// The demixing matrix found by [`sdiag_run`] plus convergence metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagonalizer {
    /// `N×R`; columns normalized so that `Σ_k (b_nᵀC_kb_n)² = 1`.
    pub b: Matrix,
    pub rank: usize,
    pub iterations_run: usize,
    /// Off-criterion of `b`, the lowest seen during the run.
    pub final_off: f64,
    pub converged: bool,
    /// Off-criterion after each iteration.
    pub off_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdiagReport {
    pub diagonalizer: Diagonalizer,
    /// Off-criterion of the normalized starting point.
    pub initial_off: f64,
    pub trace_sum_per_iter: Vec<f64>,
    pub rank_per_iter: Vec<usize>,
    /// Diagnostics evaluated at the returned `B`.
    pub top_eigs_final: Vec<f64>,
    pub second_eigs_final: Vec<f64>,
    pub u_orthogonality_final: f64,
    pub stationarity_residual_final: f64,
    pub power_fallbacks: usize,
    pub warnings: Vec<String>,
}

/// Runs SDIAG until the off-criterion stalls or `max_iterations` is reached
/// and returns the best iterate seen.
pub fn sdiag_run(c: &MatrixSet, cfg: &SdiagConfig) -> Result<SdiagReport> {
    cfg.validate()?;
    if c.is_all_zero() {
        return Err(Error::DegenerateInput("every matrix in the set is zero".into()));
    }
    let n = c.n();
    let mut warnings = Vec::new();
    if c.k() <= 2 {
        warnings.push(format!(
            "only K = {} matrices; joint diagonalization is identifiable for K > 2",
            c.k()
        ));
    }

    let b0 = match &cfg.init {
        Init::Identity => Matrix::identity(n),
        Init::Matrix(m) => {
            if m.shape() != (n, n) {
                return Err(Error::dims(
                    "sdiag_run (init)",
                    format!("{n}x{n}"),
                    format!("{}x{}", m.rows(), m.cols()),
                ));
            }
            qr_orthonormalize(m)?;
            m.clone()
        }
    };
    let mut b = normalize_columns(c, &b0)?;
    let initial_off = off_criterion(c, &b)?;
    let threshold = cfg.rel_tol * initial_off.sqrt().max(f64::EPSILON);

    let mut best = (initial_off, b.clone());
    let mut prev = initial_off;
    let mut off_history = Vec::new();
    let mut trace_sum_per_iter = Vec::new();
    let mut rank_per_iter = Vec::new();
    let mut power_fallbacks = 0;
    let mut converged = false;

    for iteration in 1..=cfg.max_iterations {
        let step = sdiag_step(c, &b, cfg).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFiniteIterate { iteration },
            other => other,
        })?;
        let off = off_criterion(c, &step.b_next)?;
        if !off.is_finite() || !step.b_next.is_finite() {
            return Err(Error::NonFiniteIterate { iteration });
        }
        off_history.push(off);
        trace_sum_per_iter.push(step.trace_sum);
        rank_per_iter.push(step.rank);
        power_fallbacks += step.power_fallbacks;
        if off < best.0 {
            best = (off, step.b_next.clone());
        }
        b = step.b_next;
        if (off.sqrt() - prev.sqrt()).abs() <= threshold {
            converged = true;
            break;
        }
        prev = off;
    }

    let (final_off, best_b) = best;
    let final_diag = final_diagnostics(c, &best_b, cfg)?;
    let stationarity = stationarity_residual(c, &best_b)?;
    let rank = best_b.cols();
    Ok(SdiagReport {
        diagonalizer: Diagonalizer {
            b: best_b,
            rank,
            iterations_run: off_history.len(),
            final_off,
            converged,
            off_history,
        },
        initial_off,
        trace_sum_per_iter,
        rank_per_iter,
        top_eigs_final: final_diag.top_eigenvalues,
        second_eigs_final: final_diag.second_eigenvalues,
        u_orthogonality_final: final_diag.u_orth_defect,
        stationarity_residual_final: stationarity,
        power_fallbacks,
        warnings,
    })
}

// Sphering and full-eig directions at `b`, then the theorem diagnostics there.
fn final_diagnostics(c: &MatrixSet, b: &Matrix, cfg: &SdiagConfig) -> Result<TheoremDiagnostics> {
    let full = SdiagConfig {
        eig_strategy: EigStrategy::FullEig,
        parallel: false,
        ..cfg.clone()
    };
    let w = whitened_problem(c, b, &full)?;
    let dirs = directions_from(&w.z, c.k(), &w.f, &w.b_local, &full)?;
    diagnostics_from(&w.z, c.k(), &dirs.u)
}
