use super::matrix::{dot, Matrix};
use crate::error::{Error, Result};

/// Pivots smaller than this fraction of `max|a|` count as singular.
pub const PIVOT_REL_TOL: f64 = 1e-14;

/// Solves `a·X = rhs` by LU factorization with partial pivoting.
pub fn solve_linear(a: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::dims(
            "solve_linear",
            "square matrix",
            format!("{}x{}", a.rows(), a.cols()),
        ));
    }
    if rhs.rows() != a.rows() {
        return Err(Error::dims("solve_linear (rhs rows)", a.rows(), rhs.rows()));
    }
    if !a.is_finite() || !rhs.is_finite() {
        return Err(Error::NonFinite {
            context: "solve_linear",
        });
    }
    let n = a.rows();
    let tol = PIVOT_REL_TOL * a.max_abs();
    let mut lu = a.clone();
    let mut x = rhs.clone();
    let m = rhs.cols();

    for col in 0..n {
        let mut piv = col;
        let mut best = lu[(col, col)].abs();
        for r in (col + 1)..n {
            if lu[(r, col)].abs() > best {
                best = lu[(r, col)].abs();
                piv = r;
            }
        }
        if best <= tol || best == 0.0 {
            return Err(Error::Singular { column: col });
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            for j in 0..m {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(piv, j)];
                x[(piv, j)] = tmp;
            }
        }
        let d = lu[(col, col)];
        for r in (col + 1)..n {
            let f = lu[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            lu[(r, col)] = f;
            for j in (col + 1)..n {
                lu[(r, j)] -= f * lu[(col, j)];
            }
            for j in 0..m {
                x[(r, j)] -= f * x[(col, j)];
            }
        }
    }

    // back substitution
    for j in 0..m {
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for l in (i + 1)..n {
                acc -= lu[(i, l)] * x[(l, j)];
            }
            x[(i, j)] = acc / lu[(i, i)];
        }
    }
    Ok(x)
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    solve_linear(a, &Matrix::identity(a.rows()))
}

/// Orthonormal factor `Q` of `a = Q·R`, with `R` carrying a positive diagonal.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass per column.
pub fn qr_orthonormalize(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::dims(
            "qr_orthonormalize",
            "square matrix",
            format!("{}x{}", a.rows(), a.cols()),
        ));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite {
            context: "qr_orthonormalize",
        });
    }
    let n = a.rows();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = a.column(j);
        let orig = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for qi in &q {
                let r = dot(qi, &v);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= r * qk;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if orig == 0.0 || norm <= 1e-12 * orig {
            return Err(Error::RankDeficient { column: j });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
    }
    Ok(Matrix::from_columns(&q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let rhs = Matrix::from_rows(&[&[1.5, -2.0], &[0.25, 7.0]]);
        assert_eq!(solve_linear(&Matrix::identity(2), &rhs).unwrap(), rhs);
    }

    #[test]
    fn diagonal_inverse() {
        let x = solve_linear(&Matrix::from_diag(&[2.0, 4.0]), &Matrix::identity(2)).unwrap();
        assert_eq!(x, Matrix::from_diag(&[0.5, 0.25]));
    }

    #[test]
    fn upper_triangular_inverse() {
        let a = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let x = solve_linear(&a, &Matrix::identity(2)).unwrap();
        assert_eq!(x, Matrix::from_rows(&[&[1.0, -1.0], &[0.0, 1.0]]));
        assert_eq!(a.matmul(&x), Matrix::identity(2));
    }

    #[test]
    fn singular_reports_column() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[1.0, 0.0, 1.0]]);
        match solve_linear(&a, &Matrix::identity(3)) {
            Err(Error::Singular { column }) => assert_eq!(column, 2),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn qr_examples() {
        assert_eq!(qr_orthonormalize(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        assert_eq!(
            qr_orthonormalize(&Matrix::from_diag(&[-3.0, 2.0])).unwrap(),
            Matrix::from_diag(&[-1.0, 1.0])
        );
        let q = qr_orthonormalize(&Matrix::from_rows(&[&[1.0, 1.0], &[1.0, -1.0]])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = Matrix::from_rows(&[&[h, h], &[h, -h]]);
        assert!(q.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn qr_rank_deficiency_names_column() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(qr_orthonormalize(&a), Err(Error::RankDeficient { column: 1 }));
    }
}
