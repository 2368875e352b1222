use thiserror::Error;

use crate::analytic::Regime;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "operator is not Hermitian: largest imaginary coefficient {max_imag:e} exceeds {tol:e}"
    )]
    HermiticityViolation { max_imag: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric failure at t = {time}: {reason}")]
    NumericFailure { time: f64, reason: String },

    #[error(
        "c_t vanishes at t = {t} (nearest zero at t = {nearest_zero}); the rate has a pole there"
    )]
    Pole { t: f64, nearest_zero: f64 },

    #[error("intermediate map from s = {s} does not exist: c_s = 0")]
    SingularMap { s: f64 },

    #[error("operation requires the {expected:?} regime, parameters are {found:?}")]
    WrongRegime { expected: Regime, found: Regime },

    #[error("xi = 0 and kappa = 0: the model has no dynamics")]
    DegenerateModel,

    #[error(
        "invalid bracket [{lo}, {hi}]: predicate must be non-Markovian at lo and Markovian at hi"
    )]
    InvalidBracket { lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NumericFailure { .. })
    }
}
