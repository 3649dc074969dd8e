use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("matrix is not symplectic (defect {defect:.3e} > {tol:.1e})")]
    NotSymplectic { defect: f64, tol: f64 },
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("ill-conditioned input: {0}")]
    Conditioning(String),
    #[error("endpoint mismatch when joining paths (gap {0:.3e})")]
    JoinMismatch(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unstable result: {0}")]
    Unstable(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code for this failure: 1 input, 2 numerically indeterminate, 3 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unstable(_) | Error::Indeterminate(_) | Error::Conditioning(_) => 2,
            Error::NonConvergence(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
