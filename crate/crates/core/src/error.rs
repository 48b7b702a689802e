use thiserror::Error;

/// Errors raised by the bound engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distortion function: {0}")]
    InvalidDistortion(String),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("level {name} = {value} is outside {range}")]
    InvalidLevel {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("scale sigma must be positive and finite, got {0}")]
    NonPositiveScale(f64),

    #[error("threshold must be nonnegative, got {0}")]
    NegativeThreshold(f64),

    #[error("derivative measure is not representable: {0}")]
    NotRepresentable(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("not attainable: {0}")]
    NotAttainable(String),

    #[error("quadrature did not reach tolerance {tol:e} within budget (best estimate {estimate}, error estimate {error:e})")]
    Quadrature { estimate: f64, error: f64, tol: f64 },

    #[error("invalid quantile function: {0}")]
    InvalidQuantile(String),

    #[error("malformed tabulation: {0}")]
    Tabulation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_level(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::InvalidLevel {
            name,
            value,
            range: "(0, 1)",
        })
    }
}
