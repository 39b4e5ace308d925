use thiserror::Error;

/// Errors produced by operator construction and numerical routines.
#[derive(Error, Debug)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: max |H[i][j] - conj(H[j][i])| = {residual:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("state not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("outcome {outcome} has probability {prob:.3e}; post-measurement state undefined")]
    UndefinedPostState { outcome: usize, prob: f64 },

    #[error("measurements are identical (d_M = {d_m:.3e}); instrument advantage undefined")]
    UndefinedAdvantage { d_m: f64 },

    #[error("eigendecomposition failed: reconstruction residual {0:.3e}")]
    EigFailure(f64),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
