use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("refinement level must be at least 1, got {0}")]
    InvalidLevel(u32),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("coefficient eta must be positive, got {0}")]
    NonPositiveEta(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("space {space} is not available on {cells} cells")]
    UnsupportedSpace { space: &'static str, cells: &'static str },

    #[error("invalid subdomain layout: {0}")]
    Layout(String),

    #[error("meshes are not nested: {0}")]
    NotNested(String),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("non-positive curvature {curvature:e} at iteration {iteration}; operator is not SPD")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
