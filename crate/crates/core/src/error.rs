use thiserror::Error;

use crate::State;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("truncation order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("non-finite vector field value at state ({}, {})", .0[0], .0[1])]
    NonFiniteField(State),

    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error(
        "sobol dimension {requested} exceeds the direction-number table ({available} dimensions)"
    )]
    SobolDimension { requested: usize, available: usize },

    #[error("malformed direction-number table at line {line}: {reason}")]
    DirectionTable { line: usize, reason: String },

    #[error("sample index {0} is out of range")]
    SampleIndex(u64),

    #[error("expected {expected} draws per step, got {got}")]
    DrawCount { expected: usize, got: usize },

    #[error("non-finite payoff at sample {0}")]
    NonFinitePayoff(u64),

    #[error("base index {index} is not supported by the {model} model")]
    UnsupportedIndex { model: &'static str, index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
