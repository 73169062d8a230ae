//! Left singular pairs of a short, wide matrix by one-sided Jacobi rotations.

use super::eig::JACOBI_MAX_SWEEPS;
use super::matrix::{dot, fix_sign, Matrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LeftSvd {
    /// Singular values, sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal left singular vectors, one per column, in the order of `values`.
    pub vectors: Matrix,
    /// `vectorsᵀ·A`: mutually orthogonal rows whose norms are `values`.
    pub rotated: Matrix,
}

/// Singular value decomposition `A = U·Σ·Vᵀ` of an `m×p` matrix, returned as
/// `U`, `Σ` and `Σ·Vᵀ`.
///
/// The rows of `A` are rotated pairwise until they are orthogonal. Working on
/// `A` rather than on `A·Aᵀ` keeps small singular values accurate relative to
/// their own size, which is what whitening `A·Aᵀ` needs. Pairs are visited in
/// a fixed order, so the result is deterministic. Each left vector is signed
/// so that its largest-magnitude component is positive.
pub fn left_svd(a: &Matrix) -> Result<LeftSvd> {
    if !a.is_finite() {
        return Err(Error::NonFinite { context: "left_svd" });
    }
    let (m, p) = a.shape();
    let mut rows: Vec<Vec<f64>> = (0..m).map(|i| a.row(i).to_vec()).collect();
    let mut q: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * (p.max(1) as f64).sqrt();

    let mut converged = m < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for i in 0..m {
            for j in (i + 1)..m {
                let alpha = dot(&rows[i], &rows[i]);
                let beta = dot(&rows[j], &rows[j]);
                let gamma = dot(&rows[i], &rows[j]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = c * t;
                rotate_pair(&mut rows, i, j, c, s);
                rotate_pair(&mut q, i, j, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "left_svd",
            iterations: JACOBI_MAX_SWEEPS,
            residual: f64::NAN,
        });
    }

    let norms: Vec<f64> = rows.iter().map(|r| dot(r, r).sqrt()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let mut vectors = Matrix::zeros(m, m);
    let mut rotated = Matrix::zeros(m, p);
    for (dst, &src) in order.iter().enumerate() {
        let mut u = q[src].clone();
        fix_sign(&mut u);
        let flip = if u == q[src] { 1.0 } else { -1.0 };
        vectors.set_column(dst, &u);
        for (k, x) in rows[src].iter().enumerate() {
            rotated[(dst, k)] = flip * x;
        }
    }
    Ok(LeftSvd {
        values: order.iter().map(|&i| norms[i]).collect(),
        vectors,
        rotated,
    })
}

fn rotate_pair(rows: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (head, tail) = rows.split_at_mut(j);
    for (x, y) in head[i].iter_mut().zip(tail[0].iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sym_eig, SymmetricMatrix};

    fn sample() -> Matrix {
        Matrix::from_rows(&[
            &[1.0, 2.0, 0.5, -1.0, 3.0],
            &[0.0, -1.0, 4.0, 2.0, 1.0],
            &[2.0, 0.5, 0.5, 1.0, -2.0],
        ])
    }

    #[test]
    fn reconstructs_and_orthogonalizes() {
        let a = sample();
        let svd = left_svd(&a).unwrap();
        assert!(svd.vectors.matmul(&svd.rotated).max_abs_diff(&a) <= 1e-13);
        let utu = svd.vectors.tr_matmul(&svd.vectors);
        assert!(utu.max_abs_diff(&Matrix::identity(3)) <= 1e-14);
        let gram = svd.rotated.matmul(&svd.rotated.transpose());
        let sq: Vec<f64> = svd.values.iter().map(|s| s * s).collect();
        assert!(gram.max_abs_diff(&Matrix::from_diag(&sq)) <= 1e-12);
        assert!(svd.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn squares_match_gram_eigenvalues() {
        let a = sample();
        let gram = SymmetricMatrix::symmetrize(a.matmul(&a.transpose()));
        let eig = sym_eig(&gram).unwrap();
        let svd = left_svd(&a).unwrap();
        for (s, l) in svd.values.iter().zip(&eig.values) {
            assert!((s * s - l).abs() <= 1e-12 * eig.values[0]);
        }
        assert!(svd.vectors.max_abs_diff(&eig.vectors) <= 1e-10);
    }

    #[test]
    fn small_singular_values_keep_relative_accuracy() {
        // Rows scaled over 12 orders of magnitude; the Gram matrix would lose
        // the smallest values entirely. With scales this far apart, σ_i is
        // s_i times the distance of row i from the span of the rows above it.
        let base = sample();
        let scales = [1.0, 1e-6, 1e-12];
        let a = Matrix::from_fn(3, 5, |i, j| scales[i] * base[(i, j)]);
        let svd = left_svd(&a).unwrap();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for (i, s) in scales.iter().enumerate() {
            let mut r = base.row(i).to_vec();
            for q in &basis {
                let c = dot(q, &r);
                r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
            let d = dot(&r, &r).sqrt();
            assert!(
                (svd.values[i] / (s * d) - 1.0).abs() <= 1e-9,
                "{i}: {} vs {}",
                svd.values[i],
                s * d
            );
            basis.push(r.into_iter().map(|x| x / d).collect());
        }
        assert!(svd.vectors.matmul(&svd.rotated).max_abs_diff(&a) <= 1e-15);
    }

    #[test]
    fn zero_rows_and_single_row() {
        let a = Matrix::from_rows(&[&[0.0, 0.0], &[3.0, 4.0]]);
        let svd = left_svd(&a).unwrap();
        assert_eq!(svd.values, vec![5.0, 0.0]);
        assert_eq!(svd.vectors.column(0), vec![0.0, 1.0]);

        let svd = left_svd(&Matrix::from_rows(&[&[-3.0, 4.0]])).unwrap();
        assert_eq!(svd.values, vec![5.0]);
        assert_eq!(svd.rotated.row(0), &[-3.0, 4.0]);
    }
}
