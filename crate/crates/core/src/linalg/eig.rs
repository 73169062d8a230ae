//! Symmetric eigensolvers: cyclic Jacobi for the full spectrum and power
//! passes for the dominant pair.

use super::matrix::{dot, fix_sign, norm2, off_norm2, Matrix, SymmetricMatrix};
use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi solver.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Stop once the off-diagonal Frobenius norm falls below this fraction of `‖S‖_F`.
pub const JACOBI_REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    /// Eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: Matrix,
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Pairs `(p, q)` are visited in row-major order (`p < q`) every sweep, so the
/// output is a deterministic function of the input. Each eigenvector is signed
/// so that its largest-magnitude component is positive.
pub fn sym_eig(s: &SymmetricMatrix) -> Result<EigenDecomposition> {
    if !s.is_finite() {
        return Err(Error::NonFinite { context: "sym_eig" });
    }
    let n = s.dim();
    let mut a = s.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let threshold = JACOBI_REL_TOL * s.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm2(&a).sqrt() <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn, t * apq);
            }
        }
    }
    if !converged {
        let residual = off_norm2(&a).sqrt();
        if residual > threshold {
            return Err(Error::NoConvergence {
                what: "sym_eig",
                iterations: JACOBI_MAX_SWEEPS,
                residual,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(EigenDecomposition { values, vectors })
}

// Applies the rotation zeroing a[p][q]; `shift` is t·a_pq.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64, shift: f64) {
    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a[(k, p)] = new_p;
        a[(p, k)] = new_p;
        a[(k, q)] = new_q;
        a[(q, k)] = new_q;
    }
    a[(p, p)] -= shift;
    a[(q, q)] += shift;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerResult {
    /// Rayleigh quotient of the returned vector.
    pub eigenvalue: f64,
    /// Unit-L2 vector, sign-fixed like [`sym_eig`].
    pub vector: Vec<f64>,
    /// Number of multiply-and-renormalize passes applied to the start vector.
    pub passes: usize,
}

/// Dominant eigenpair of a symmetric positive semidefinite matrix.
///
/// Stops as soon as `‖S·v − λ·v‖₂ ≤ tol`. A result whose Rayleigh quotient is
/// below the mean eigenvalue `tr(S)/n` cannot be the dominant pair and is
/// reported as [`Error::NoConvergence`]; this catches start vectors lying in
/// the orthogonal complement of the dominant eigenspace.
pub fn power_iteration(s: &SymmetricMatrix, start: &[f64], max_passes: usize, tol: f64) -> Result<PowerResult> {
    let n = s.dim();
    if start.len() != n {
        return Err(Error::dims("power_iteration", n, start.len()));
    }
    if !s.is_finite() || start.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: "power_iteration",
        });
    }
    let start_norm = norm2(start);
    if start_norm == 0.0 {
        return Err(Error::DegenerateInput("power_iteration: zero start vector".into()));
    }
    let mut v: Vec<f64> = start.iter().map(|x| x / start_norm).collect();
    let trace = s.trace();
    let mean_eig = trace / n as f64;

    let mut passes = 0;
    loop {
        let w = s.matvec(&v);
        let lambda = dot(&v, &w);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - lambda * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            if lambda < mean_eig - 1e-12 * trace.abs() {
                return Err(Error::NoConvergence {
                    what: "power_iteration (start orthogonal to dominant eigenspace)",
                    iterations: passes,
                    residual,
                });
            }
            fix_sign(&mut v);
            return Ok(PowerResult {
                eigenvalue: lambda,
                vector: v,
                passes,
            });
        }
        if passes == max_passes {
            return Err(Error::NoConvergence {
                what: "power_iteration",
                iterations: passes,
                residual,
            });
        }
        let wn = norm2(&w);
        v = w.into_iter().map(|x| x / wn).collect();
        passes += 1;
    }
}
