use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why an initial-value solve stopped before reaching x = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    StepUnderflow,
    Overflow,
    NonFinite,
    TooManySteps,
}

impl std::fmt::Display for FailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FailureKind::StepUnderflow => "step size underflow",
            FailureKind::Overflow => "state overflow",
            FailureKind::NonFinite => "non-finite state",
            FailureKind::TooManySteps => "step budget exhausted",
        };
        f.write_str(s)
    }
}

/// An initial-value solve that did not reach the right endpoint. Carries the
/// last accepted position and state so callers can still read off signs.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("integration failed at x = {x}: {kind}")]
pub struct IntegrationFailure {
    pub kind: FailureKind,
    pub x: f64,
    pub state: [f64; 4],
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Integration(#[from] IntegrationFailure),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
