use thiserror::Error;

/// Errors surfaced by construction and verification routines.
///
/// Failed *checks* are not errors: a verification that runs to completion
/// reports `pass = false` in its report. Errors are reserved for inputs that
/// violate a documented precondition or make a construction meaningless.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown point id {0}")]
    UnknownId(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero-measure set: {0}")]
    ZeroMeasure(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("scale error: {msg}{}", match .min_admissible { Some(k) => format!("; minimal admissible generation {k}"), None => String::new() })]
    Scale {
        msg: String,
        min_admissible: Option<usize>,
    },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("forest geometry violated: {0}")]
    ForestGeometry(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn scale(msg: impl Into<String>) -> Error {
    Error::Scale {
        msg: msg.into(),
        min_admissible: None,
    }
}

pub(crate) fn construction(msg: impl Into<String>) -> Error {
    Error::Construction(msg.into())
}

pub(crate) fn forest_geometry(msg: impl Into<String>) -> Error {
    Error::ForestGeometry(msg.into())
}
