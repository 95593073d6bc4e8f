use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its physical domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A numeric input is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Antenna positions violate the spacing or deployment-range constraints.
    #[error("infeasible placement on waveguide {waveguide}: {reason}")]
    Infeasible { waveguide: usize, reason: String },

    /// Several waveguides failed placement at once.
    #[error("infeasible placement on waveguides {waveguides:?}")]
    InfeasibleMany { waveguides: Vec<usize> },

    /// The requested beamformer needs a different number of RF chains.
    #[error("RF mode error: {0}")]
    Mode(String),

    /// Malformed experiment configuration.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for geometry errors (placement could not fit the antennas).
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. } | Error::InfeasibleMany { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
