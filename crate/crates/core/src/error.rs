use thiserror::Error;

/// Errors raised by the model, the numerical kernels and the lattice checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("{quantity} did not converge (best estimate {estimate:e}, error {error:e})")]
    Convergence {
        quantity: String,
        estimate: f64,
        error: f64,
    },

    #[error("internal consistency check failed for {quantity}: {detail}")]
    Consistency { quantity: String, detail: String },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("energy cutoff leaves no lattice modes (L = {length}, cutoff = {cutoff})")]
    EmptyLattice { length: f64, cutoff: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
