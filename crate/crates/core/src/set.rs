use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricMatrix};

/// The `K` real symmetric `N×N` matrices to be jointly diagonalized.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSet {
    n: usize,
    matrices: Vec<SymmetricMatrix>,
}

impl MatrixSet {
    pub fn new(matrices: Vec<SymmetricMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::DegenerateInput("matrix set must contain at least one matrix".into()))?;
        let n = first.dim();
        if n == 0 {
            return Err(Error::dims("MatrixSet::new", "N >= 1", 0));
        }
        for (k, m) in matrices.iter().enumerate() {
            if m.dim() != n {
                return Err(Error::dims(
                    "MatrixSet::new",
                    format!("{n}x{n}"),
                    format!("matrix {k} is {0}x{0}", m.dim()),
                ));
            }
            if !m.is_finite() {
                return Err(Error::NonFinite {
                    context: "MatrixSet::new",
                });
            }
        }
        Ok(MatrixSet { n, matrices })
    }

    /// Matrix dimension `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of matrices `K`.
    pub fn k(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[SymmetricMatrix] {
        &self.matrices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SymmetricMatrix> {
        self.matrices.iter()
    }

    /// `Σ_k ‖C_k‖_F²`, the natural scale for off-criterion tolerances.
    pub fn total_energy(&self) -> f64 {
        self.matrices.iter().map(|m| m.frobenius_norm2()).sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.matrices.iter().all(|m| m.as_slice().iter().all(|&x| x == 0.0))
    }

    /// Applies the congruence `Bᵀ·C_k·B` to every member.
    pub fn congruence(&self, b: &Matrix) -> Vec<SymmetricMatrix> {
        self.matrices.iter().map(|c| c.congruence(b)).collect()
    }

    pub(crate) fn check_rows(&self, context: &'static str, b: &Matrix) -> Result<()> {
        if b.rows() != self.n {
            return Err(Error::dims(
                context,
                format!("{} rows", self.n),
                format!("{} rows", b.rows()),
            ));
        }
        if b.cols() == 0 {
            return Err(Error::dims(context, "at least one column", 0));
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a MatrixSet {
    type Item = &'a SymmetricMatrix;
    type IntoIter = std::slice::Iter<'a, SymmetricMatrix>;

    fn into_iter(self) -> Self::IntoIter {
        self.matrices.iter()
    }
}
