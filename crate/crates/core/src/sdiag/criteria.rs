//! Least-squares off-criterion, its quadratic-form rewrite and the
//! per-direction matrices `M_n` it is built from.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, off_norm2, Matrix, SymmetricMatrix};
use crate::set::MatrixSet;

/// Columns whose normalization energy falls at or below this are degenerate.
pub const DEGENERATE_COLUMN_ENERGY: f64 = 1e-300;

/// `M_n = Σ_k (C_k·b)(C_k·b)ᵀ` for one direction `b`.
pub fn compute_m_n(c: &MatrixSet, b_n: &[f64]) -> Result<SymmetricMatrix> {
    if b_n.len() != c.n() {
        return Err(Error::dims("compute_m_n", c.n(), b_n.len()));
    }
    let mut m = SymmetricMatrix::zeros(c.n());
    for ck in c {
        m.add_outer(&ck.matvec(b_n));
    }
    Ok(m)
}

/// `M = Σ_k C_k·B·Bᵀ·C_kᵀ`, evaluated directly from the products `C_k·B`.
pub fn compute_m(c: &MatrixSet, b: &Matrix) -> Result<SymmetricMatrix> {
    c.check_rows("compute_m", b)?;
    let n = c.n();
    let mut m = Matrix::zeros(n, n);
    for ck in c {
        let p = ck.as_matrix().matmul(b);
        for i in 0..n {
            for j in i..n {
                m[(i, j)] += dot(p.row(i), p.row(j));
            }
        }
    }
    Ok(SymmetricMatrix::from_upper(m))
}

/// `M_n` for every column of `b`.
pub fn compute_m_columns(c: &MatrixSet, b: &Matrix) -> Result<Vec<SymmetricMatrix>> {
    c.check_rows("compute_m_columns", b)?;
    (0..b.cols()).map(|j| compute_m_n(c, &b.column(j))).collect()
}

/// `Σ_n M_n`, summed in column order.
pub fn sum_m(m_cols: &[SymmetricMatrix]) -> SymmetricMatrix {
    let mut iter = m_cols.iter();
    let mut acc = iter.next().expect("at least one column").clone();
    for m in iter {
        acc = acc.add(m);
    }
    acc
}

/// `Σ_k ‖Off(Bᵀ·C_k·B)‖²`.
pub fn off_criterion(c: &MatrixSet, b: &Matrix) -> Result<f64> {
    c.check_rows("off_criterion", b)?;
    Ok(c.iter().map(|ck| off_norm2(&ck.congruence(b))).sum())
}

/// The same criterion written as `tr(BᵀMB) − Σ_n b_nᵀ·M_n·b_n`.
pub fn gamma_criterion(c: &MatrixSet, b: &Matrix) -> Result<f64> {
    let m_cols = compute_m_columns(c, b)?;
    let m = sum_m(&m_cols);
    let mut total = 0.0;
    let mut diag = 0.0;
    for (j, m_n) in m_cols.iter().enumerate() {
        let b_n = b.column(j);
        total += m.bilinear(&b_n, &b_n);
        diag += m_n.bilinear(&b_n, &b_n);
    }
    Ok(total - diag)
}

/// `Σ_k (bᵀ·C_k·b)²`, which equals `bᵀ·M_b·b`.
pub fn column_energy(c: &MatrixSet, b_n: &[f64]) -> f64 {
    c.iter().map(|ck| ck.bilinear(b_n, b_n).powi(2)).sum()
}

/// Rescales every column so that `Σ_k (b_nᵀ·C_k·b_n)² = 1`.
pub fn normalize_columns(c: &MatrixSet, b: &Matrix) -> Result<Matrix> {
    c.check_rows("normalize_columns", b)?;
    let mut out = b.clone();
    for j in 0..b.cols() {
        let col = b.column(j);
        let energy = column_energy(c, &col);
        if !energy.is_finite() {
            return Err(Error::NonFinite {
                context: "normalize_columns",
            });
        }
        if energy <= DEGENERATE_COLUMN_ENERGY {
            return Err(Error::DegenerateColumn {
                column: j,
                value: energy,
            });
        }
        let scale = energy.powf(-0.25);
        let scaled: Vec<f64> = col.iter().map(|x| x * scale).collect();
        out.set_column(j, &scaled);
    }
    Ok(out)
}

/// Largest relative residual of the pencil equations `M_n·b_n = ρ_n·M·b_n`,
/// with `ρ_n` the generalized Rayleigh quotient of `b_n`.
pub fn stationarity_residual(c: &MatrixSet, b: &Matrix) -> Result<f64> {
    let m_cols = compute_m_columns(c, b)?;
    let m = sum_m(&m_cols);
    let mut worst: f64 = 0.0;
    for (j, m_n) in m_cols.iter().enumerate() {
        let b_n = b.column(j);
        let x = m_n.matvec(&b_n);
        let y = m.matvec(&b_n);
        let bmb = dot(&b_n, &y);
        if bmb <= 0.0 {
            return Err(Error::DegeneratePencil { column: j, value: bmb });
        }
        let xn = norm2(&x);
        if xn == 0.0 {
            return Err(Error::DegeneratePencil { column: j, value: bmb });
        }
        let rho = dot(&b_n, &x) / bmb;
        let r: f64 = x
            .iter()
            .zip(&y)
            .map(|(xi, yi)| (xi - rho * yi).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r / xn);
    }
    Ok(worst)
}

/// Compares `BᵀMB` with `Σ_k diag(BᵀC_kB)²`; both coincide at an exact
/// joint diagonalizer.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBalance {
    /// `max_{i≠j} |(BᵀMB)_ij|`.
    pub off_max: f64,
    /// `max_ij |BᵀMB − Σ_k diag(BᵀC_kB)²|`.
    pub max_deviation: f64,
}

pub fn energy_balance(c: &MatrixSet, b: &Matrix) -> Result<EnergyBalance> {
    let m = compute_m(c, b)?;
    let bmb = m.congruence(b);
    let r = b.cols();
    let mut diag_sq = vec![0.0; r];
    for t in c.congruence(b) {
        for (i, d) in diag_sq.iter_mut().enumerate() {
            *d += t[(i, i)] * t[(i, i)];
        }
    }
    let mut off_max: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            if i != j {
                off_max = off_max.max(bmb[(i, j)].abs());
            }
        }
    }
    let max_deviation = bmb.max_abs_diff(&Matrix::from_diag(&diag_sq));
    Ok(EnergyBalance { off_max, max_deviation })
}
