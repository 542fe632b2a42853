use thiserror::Error;

use crate::geodesy::Extension;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not positive definite: eigenvalues span [{min:e}, {max:e}]")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("matrix is degenerate: {0}")]
    Degenerate(String),

    #[error("matrix is not orthogonal: |O^T O - I|_F = {residual:e}")]
    NotOrthogonal { residual: f64 },

    #[error("parameter {value} outside [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    /// The geodesic ray leaves the cone before the requested parameter.
    #[error("parameter {t} is outside the exponential domain (eps_max = {eps_max})")]
    Boundary { t: f64, eps_max: Extension },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub(crate) fn ensure_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
