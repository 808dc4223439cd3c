use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("{0} is not symmetric positive definite")]
    NotPositiveDefinite(String),

    #[error("matrix is not skew-symmetric: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotSkewSymmetric { residual: f64, tolerance: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("eigensolver failure: {0}")]
    EigenSolver(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("invalid scaling: {0}")]
    Scaling(String),
}

pub type Result<V> = std::result::Result<V, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
