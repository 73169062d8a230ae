use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is singular: pivot in column {column} below tolerance")]
    Singular { column: usize },

    #[error("matrix is rank deficient: column {column} depends on the preceding columns")]
    RankDeficient { column: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate column {column}: sum_k (b^T C_k b)^2 = {value:e}")]
    DegenerateColumn { column: usize, value: f64 },

    #[error("degenerate pencil for column {column}: b^T M b = {value:e}")]
    DegeneratePencil { column: usize, value: f64 },

    #[error("non-finite intermediate values at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("performance index undefined for an all-zero matrix")]
    UndefinedIndex,
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for errors caused by the data rather than by the caller.
    pub fn is_degenerate_data(&self) -> bool {
        matches!(
            self,
            Error::DegenerateInput(_)
                | Error::DegenerateColumn { .. }
                | Error::DegeneratePencil { .. }
                | Error::Singular { .. }
                | Error::RankDeficient { .. }
                | Error::NonFiniteIterate { .. }
                | Error::UndefinedIndex
        )
    }
}
