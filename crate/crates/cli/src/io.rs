//! JSON file formats.
//!
//! A matrix set is `{"n": N, "k": K, "matrices": [[N² row-major floats], …]}`;
//! a single matrix is `{"rows": R, "cols": C, "data": [R·C row-major floats]}`.
//! Floats are written with shortest round-trip formatting, so a write/read
//! cycle reproduces every value bit for bit.

use std::fmt;
use std::fs;
use std::path::Path;

use ajd_core::{Matrix, MatrixSet, SymmetricMatrix};
use serde::{Deserialize, Serialize};

/// Asymmetry tolerated (and averaged away) on load, relative to `max(1, max|a|)`.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSetFile {
    pub n: usize,
    pub k: usize,
    pub matrices: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Matrix> for MatrixFile {
    fn from(m: &Matrix) -> Self {
        MatrixFile {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().to_vec(),
        }
    }
}

#[derive(Debug)]
pub enum LoadError {
    Io(String),
    /// Malformed JSON or wrong document shape; the message carries line and column.
    Parse(String),
    /// Well-formed document describing an invalid matrix set.
    Invalid(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(m) | LoadError::Parse(m) | LoadError::Invalid(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for LoadError {}

impl MatrixSetFile {
    pub fn from_set(set: &MatrixSet) -> Self {
        MatrixSetFile {
            n: set.n(),
            k: set.k(),
            matrices: set.iter().map(|m| m.as_slice().to_vec()).collect(),
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, LoadError> {
        serde_json::from_str(text).map_err(|e| LoadError::Parse(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
    }

    /// Checks shape and symmetry; near-symmetric matrices are averaged with
    /// their transpose.
    pub fn into_set(self) -> Result<MatrixSet, LoadError> {
        let n = self.n;
        if n == 0 {
            return Err(LoadError::Invalid("n must be at least 1".into()));
        }
        if self.k != self.matrices.len() {
            return Err(LoadError::Invalid(format!(
                "k = {} but {} matrices are listed",
                self.k,
                self.matrices.len()
            )));
        }
        if self.k == 0 {
            return Err(LoadError::Invalid("the set holds no matrices".into()));
        }
        let mut out = Vec::with_capacity(self.k);
        for (idx, data) in self.matrices.into_iter().enumerate() {
            if data.len() != n * n {
                return Err(LoadError::Invalid(format!(
                    "matrix {idx} has {} entries, expected n² = {}",
                    data.len(),
                    n * n
                )));
            }
            let m = Matrix::from_row_major(n, n, data).map_err(|e| LoadError::Invalid(format!("matrix {idx}: {e}")))?;
            let scale = m.max_abs().max(1.0);
            let asym = m.max_abs_diff(&m.transpose());
            if asym > SYMMETRY_TOL * scale {
                return Err(LoadError::Invalid(format!(
                    "matrix {idx} is not symmetric (max |a_ij - a_ji| = {asym:e})"
                )));
            }
            out.push(SymmetricMatrix::symmetrize(m));
        }
        MatrixSet::new(out).map_err(|e| LoadError::Invalid(e.to_string()))
    }
}

pub fn read_matrix_set(path: &Path) -> Result<MatrixSet, LoadError> {
    let text = fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    MatrixSetFile::parse(&text, &path.display().to_string())?.into_set()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}
