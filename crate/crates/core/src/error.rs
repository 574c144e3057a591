use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain where the model or operation is defined.
    #[error("parameter `{name}` out of domain: {reason}")]
    Domain { name: &'static str, reason: String },

    /// Eigenvalues coincide (or nearly so) and the eigenvector basis is unavailable.
    #[error("degenerate eigenproblem: {0}")]
    Degenerate(String),

    /// The operator is not asymptotically stable where stability is required.
    #[error("operator is not stable: spectral abscissa {abscissa:.6e} >= 0")]
    Unstable { abscissa: f64 },

    /// Non-finite values appeared during time integration.
    #[error("blow-up at t = {time:.6}: max |u| = {max_abs_u:.6e}")]
    BlowUp { time: f64, max_abs_u: f64 },

    /// An invalid simulation or scan configuration.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: &'static str, reason: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            key,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_) | Error::BlowUp { .. } | Error::Unstable { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
