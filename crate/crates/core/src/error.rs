use thiserror::Error;

/// Errors raised by the channel engine, statistics and estimation code.
#[derive(Debug, Error)]
pub enum GbsmError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coincident points: direction between a and b is undefined")]
    CoincidentPoints,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("all powers are zero")]
    ZeroPower,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown statistic `{0}`")]
    UnknownStatistic(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GbsmError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> GbsmError {
    GbsmError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
