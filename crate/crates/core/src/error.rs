use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel evaluated at its singular point z = 0")]
    SingularPoint,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point outside the domain of definition: {0}")]
    Domain(String),

    #[error("Levinson recursion broke down at order {order} (denominator {denominator:e})")]
    LevinsonBreakdown { order: usize, denominator: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("quadrature did not converge on [{a}, {b}]: achieved error {achieved:e}")]
    Quadrature { a: f64, b: f64, achieved: f64 },

    #[error("not enough samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("empty fitting window")]
    EmptyWindow,

    #[error("at t = {t}, x = {x}: {source}")]
    AtPoint {
        t: f64,
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(#[from] crate::config::ConfigError),

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
