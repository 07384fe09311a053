use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("frequency is not on the mode grid (omega*L/(2*pi*c) = {ratio})")]
    NotOnGrid { ratio: f64 },

    #[error("mode index {0} is not positive")]
    NonPositive(i64),

    #[error("matrix exponential did not reach the required accuracy (residual {residual:e})")]
    Convergence { residual: f64 },

    #[error("truncation window too small: {leakage:e} probability near the window edge")]
    Truncation { leakage: f64 },

    /// A contributing output mode has index <= 0.
    #[error("output mode {0} is unphysical (index <= 0)")]
    UnphysicalMode(i64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
