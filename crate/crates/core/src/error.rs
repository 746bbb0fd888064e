use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("eigenvalue iteration did not converge; best largest-eigenvalue estimate {lambda_max_estimate:e}")]
    EigenNoConvergence { lambda_max_estimate: f64 },

    #[error("matrix is rank deficient: rank {rank} of {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("KKT matrix is singular: rank {rank} of {size}")]
    SingularKkt { rank: usize, size: usize },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("affine constraint set is empty (residual {residual:e})")]
    InfeasibleAffine { residual: f64 },

    #[error("all eigenvalues are zero")]
    ZeroSpectrum,

    #[error("unsupported {subproblem} subproblem: {reason}")]
    Capability {
        subproblem: &'static str,
        reason: String,
    },

    #[error("rate {rate} is not below one; no iteration bound exists")]
    Unbounded { rate: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
