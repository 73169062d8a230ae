use std::fmt;
use std::ops::{Deref, Index, IndexMut};

use crate::error::{Error, Result};

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dims(
                "Matrix::from_row_major",
                "positive shape",
                format!("{rows}x{cols}"),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::dims("Matrix::from_row_major", rows * cols, data.len()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "Matrix::from_row_major",
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Convenience constructor from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        Matrix::from_fn(rows, cols, |i, j| columns[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product; panics if the inner dimensions disagree.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(l)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · rhs` without forming the transpose.
    pub fn tr_matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "tr_matmul: row counts differ");
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        for l in 0..self.rows {
            let rr = rhs.row(l);
            for (i, &a) in self.row(l).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rr) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec: length mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ · v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "tr_matvec: length mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &x) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * x;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shapes differ");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shapes differ");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm2().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute entry of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        assert_eq!(self.shape(), rhs.shape());
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for x in self.row(i) {
                write!(f, "{x:>12.6e} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Square matrix with `a[i][j] == a[j][i]` bit for bit.
#[derive(Clone, PartialEq, Debug)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix(Matrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(Matrix::identity(n))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        SymmetricMatrix(Matrix::from_diag(diag))
    }

    /// Accepts only exactly symmetric, finite, square input.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(
                "SymmetricMatrix::new",
                "square",
                format!("{}x{}", m.rows, m.cols),
            ));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite {
                context: "SymmetricMatrix::new",
            });
        }
        let n = m.rows;
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::DegenerateInput(format!(
                        "matrix not symmetric at ({i}, {j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(SymmetricMatrix(m))
    }

    /// Panicking variant of [`SymmetricMatrix::new`] for literals in tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        SymmetricMatrix::new(Matrix::from_rows(rows)).expect("symmetric literal")
    }

    /// Mirrors the upper triangle (including the diagonal) into the lower one.
    pub fn from_upper(mut m: Matrix) -> Self {
        assert!(m.is_square(), "from_upper: matrix must be square");
        let n = m.rows;
        for i in 0..n {
            for j in (i + 1)..n {
                m[(j, i)] = m[(i, j)];
            }
        }
        SymmetricMatrix(m)
    }

    /// Replaces `m` by `(m + mᵀ)/2`.
    pub fn symmetrize(m: Matrix) -> Self {
        assert!(m.is_square(), "symmetrize: matrix must be square");
        let n = m.rows;
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        SymmetricMatrix(out)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn add(&self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(self.0.add(&rhs.0))
    }

    /// In-place `self += x·xᵀ`; keeps exact symmetry.
    pub fn add_outer(&mut self, x: &[f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                self.0[(i, j)] += x[i] * x[j];
            }
        }
    }

    /// Congruence `Hᵀ·S·H`, symmetric by construction.
    pub fn congruence(&self, h: &Matrix) -> SymmetricMatrix {
        assert_eq!(h.rows(), self.dim(), "congruence: H row count must match");
        let sh = self.0.matmul(h);
        let r = h.cols();
        let mut out = Matrix::zeros(r, r);
        for i in 0..r {
            for j in i..r {
                let mut acc = 0.0;
                for l in 0..h.rows() {
                    acc += h[(l, i)] * sh[(l, j)];
                }
                out[(i, j)] = acc;
            }
        }
        SymmetricMatrix::from_upper(out)
    }

    /// Quadratic form `xᵀ·S·y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.0.matvec(y))
    }
}

impl Deref for SymmetricMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl From<SymmetricMatrix> for Matrix {
    fn from(s: SymmetricMatrix) -> Matrix {
        s.0
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Sum of squared off-diagonal entries.
pub fn off_norm2(a: &Matrix) -> f64 {
    assert!(a.is_square(), "off_norm2: matrix must be square");
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s
}

/// Sum of squared diagonal entries.
pub fn diag_norm2(a: &Matrix) -> f64 {
    assert!(a.is_square(), "diag_norm2: matrix must be square");
    (0..a.rows()).map(|i| a[(i, i)] * a[(i, i)]).sum()
}

/// Flips the sign of `v` so its largest-magnitude entry is positive
/// (ties go to the lowest index).
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_and_diag_norms() {
        let i3 = Matrix::identity(3);
        assert_eq!(off_norm2(&i3), 0.0);
        assert_eq!(diag_norm2(&i3), 3.0);

        let swap = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(off_norm2(&swap), 2.0);
        assert_eq!(diag_norm2(&swap), 0.0);

        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(off_norm2(&a), 13.0);
        assert_eq!(diag_norm2(&a), 17.0);
        assert_eq!(off_norm2(&a) + diag_norm2(&a), a.frobenius_norm2());
    }

    #[test]
    fn rejects_non_finite_and_bad_lengths() {
        assert!(matches!(
            Matrix::from_row_major(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            Matrix::from_row_major(2, 2, vec![1.0, 0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(SymmetricMatrix::new(Matrix::from_rows(&[&[1.0, 2.0], &[2.5, 1.0]])).is_err());
    }

    #[test]
    fn products_agree_with_transposes() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let b = Matrix::from_rows(&[&[1.0, -1.0], &[0.5, 2.0]]);
        assert_eq!(a.tr_matmul(&b), a.transpose().matmul(&b));
        assert_eq!(a.tr_matvec(&[1.0, 2.0]), a.transpose().matvec(&[1.0, 2.0]));
    }

    #[test]
    fn congruence_is_exactly_symmetric() {
        let s = SymmetricMatrix::from_rows(&[&[2.0, 0.3, 0.1], &[0.3, 1.0, -0.7], &[0.1, -0.7, 5.0]]);
        let h = Matrix::from_rows(&[&[0.1, 0.7], &[1.3, -0.2], &[0.4, 0.9]]);
        let c = s.congruence(&h);
        assert_eq!(c[(0, 1)], c[(1, 0)]);
        let direct = h.transpose().matmul(s.as_matrix()).matmul(&h);
        assert!(c.max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn sign_convention_prefers_lowest_index_on_ties() {
        let mut v = vec![-0.5, 0.5];
        fix_sign(&mut v);
        assert_eq!(v, vec![0.5, -0.5]);
        let mut w = vec![0.1, -0.9];
        fix_sign(&mut w);
        assert_eq!(w, vec![-0.1, 0.9]);
    }
}
