use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |M - M^dag| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("eigenvalue {eigenvalue:e} lies outside the domain of the matrix function")]
    Domain { eigenvalue: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidState { reason: String },

    #[error("density matrix is rank deficient: smallest eigenvalue {smallest:e} <= threshold {threshold:e}")]
    RankDeficient { smallest: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("consistency check failed: {what} (lhs {lhs:e}, rhs {rhs:e})")]
    Consistency { what: String, lhs: f64, rhs: f64 },

    #[error("propagation failed at step {step}: trace defect {trace_defect:e}, hermiticity defect {hermiticity_defect:e}, min eigenvalue {min_eigenvalue:e}")]
    Propagation {
        step: usize,
        trace_defect: f64,
        hermiticity_defect: f64,
        min_eigenvalue: f64,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

impl Error {
    pub(crate) fn dim(expected: usize, actual: usize) -> Self {
        Error::Dimension { expected, actual }
    }
}
