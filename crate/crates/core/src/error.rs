use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gamma function pole at z = {0}")]
    GammaPole(f64),

    #[error("precision loss: {method} cannot certify {target:e} relative accuracy at n = {n} (error bound {bound:e})")]
    PrecisionLoss { method: &'static str, n: u64, target: f64, bound: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("search horizon too small: maximizer sits on the grid edge z = {edge}")]
    HorizonTooSmall { edge: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
