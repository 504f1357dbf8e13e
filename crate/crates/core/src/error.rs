use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite argument `{name}` = {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("S_k/k = {value} at k = {k} lies outside the domain {domain} of f")]
    Domain { k: usize, value: f64, domain: String },

    #[error("partial sum S_{k} = {value} is not positive")]
    NonPositive { k: usize, value: f64 },

    #[error("no norming formula is registered for family `{0}`")]
    NoNormingFormula(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
