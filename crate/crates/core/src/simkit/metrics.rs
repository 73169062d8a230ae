use crate::error::{Error, Result};
use crate::linalg::Matrix;

fn squared_maxima(g: &Matrix) -> Result<(f64, f64, f64)> {
    if !g.is_square() {
        return Err(Error::dims(
            "performance_index",
            "square matrix",
            format!("{}x{}", g.rows(), g.cols()),
        ));
    }
    let n = g.rows();
    let mut total = 0.0;
    let mut row_max = vec![0.0f64; n];
    let mut col_max = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            let v = g[(i, j)] * g[(i, j)];
            total += v;
            row_max[i] = row_max[i].max(v);
            col_max[j] = col_max[j].max(v);
        }
    }
    if total == 0.0 {
        return Err(Error::UndefinedIndex);
    }
    Ok((total, row_max.iter().sum(), col_max.iter().sum()))
}

/// How close `G = BᵀA` is to a scaled, signed permutation:
///
/// ```text
/// (Σ_i max_j G_ij² + Σ_j max_i G_ij²) / (2·Σ_ij G_ij²)
/// ```
///
/// Lies in `(0, 1]` and equals 1 exactly on generalized permutations.
pub fn performance_index(g: &Matrix) -> Result<f64> {
    let (total, rows, cols) = squared_maxima(g)?;
    Ok((rows + cols) / (2.0 * total))
}

/// The literal variant `2(N−1)·Σ_ij G_ij² / (Σ_i max_j G_ij² + Σ_j max_i G_ij²)`,
/// kept for auditing; it evaluates to `N−1` on a generalized permutation.
pub fn performance_index_as_printed(g: &Matrix) -> Result<f64> {
    let (total, rows, cols) = squared_maxima(g)?;
    let n = g.rows() as f64;
    Ok(2.0 * (n - 1.0) * total / (rows + cols))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation (divisor `count − 1`; 0 for a single value).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SummaryStats {
    /// `None` for an empty sample.
    pub fn from_values(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let count = xs.len();
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = (xs.iter().sum::<f64>() / count as f64).clamp(min, max);
        let std = if count > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(SummaryStats {
            mean,
            std,
            min,
            max,
            count,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TTest {
    /// `±∞` when both samples have zero variance but different means.
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
}

impl TTest {
    pub fn is_infinite(&self) -> bool {
        self.t_statistic.is_infinite()
    }
}

/// Unpaired two-sample Student t with pooled variance, `df = n_a + n_b − 2`.
pub fn t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "t_test needs at least two values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let ss = |xs: &[f64], m: f64| xs.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    let (ma, mb) = (mean(a), mean(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = a.len() + b.len() - 2;
    let pooled = (ss(a, ma) + ss(b, mb)) / df as f64;
    let diff = ma - mb;
    let t = if diff == 0.0 {
        0.0
    } else if pooled == 0.0 {
        diff.signum() * f64::INFINITY
    } else {
        diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt()
    };
    Ok(TTest {
        t_statistic: t,
        degrees_of_freedom: df,
    })
}
