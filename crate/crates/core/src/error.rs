use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter for {family}: {constraint}")]
    InvalidParameter {
        family: &'static str,
        constraint: String,
    },

    #[error("derivative of order {order} is not finite at x = {x}")]
    NonFiniteDerivative { x: f64, order: usize },

    #[error("generator not d-monotone at dimension d = {d} (radial CDF {value} at x = {x})")]
    NotDMonotone { d: usize, x: f64, value: f64 },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("could not bracket the quantile for u = {u}")]
    Bracket { u: f64 },

    #[error("copula has no density at dimension d = {d}: {reason}")]
    NoDensity { d: usize, reason: String },

    #[error("internal consistency check failed for {quantity}: {first} vs {second}")]
    Inconsistent {
        quantity: &'static str,
        first: f64,
        second: f64,
    },

    #[error("parameter not identifiable: objective varies by {spread:e} over the bounds")]
    NonIdentifiable { spread: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn param(family: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            family,
            constraint: constraint.into(),
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NonFiniteDerivative { .. } => "non_finite_derivative",
            Error::NotDMonotone { .. } => "not_d_monotone",
            Error::Quadrature { .. } => "quadrature",
            Error::Bracket { .. } => "bracket",
            Error::NoDensity { .. } => "no_density",
            Error::Inconsistent { .. } => "inconsistent",
            Error::NonIdentifiable { .. } => "non_identifiable",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
