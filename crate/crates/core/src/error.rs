use thiserror::Error;

use crate::energy::EnergyResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not reach its error target: estimate {estimate:e}, error {error:e} > {target:e}")]
    NonConvergedQuadrature {
        estimate: f64,
        error: f64,
        target: f64,
    },

    #[error("model `{0}` has no sampling recipe")]
    NoSampler(String),

    #[error("model `{0}` has no characteristic exponent")]
    NoCharExponent(String),

    #[error("net would hold {points} points, cap is {cap}")]
    MeshTooFine { points: f64, cap: usize },

    #[error("kernel matrix would be {n}x{n}, dense cap is {cap}")]
    NetTooLarge { n: usize, cap: usize },

    #[error("brute-force enumeration too large: {reason}")]
    TooLarge { reason: String },

    #[error("Frank-Wolfe hit {iterations} iterations with relative gap {gap:e}")]
    MaxIterExceeded {
        iterations: usize,
        gap: f64,
        best: Box<EnergyResult>,
    },

    #[error("ladder is degenerate: {0}")]
    DegenerateLadder(String),

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("mismatched inputs: {0}")]
    MismatchedInputs(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical routine (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergedQuadrature { .. } | Error::MaxIterExceeded { .. }
        )
    }
}
