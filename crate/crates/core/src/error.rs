use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("trace {0} contains no records")]
    EmptyTrace(PathBuf),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unstable process: excitation spectral radius {radius:.4} >= 1")]
    Unstable { radius: f64 },

    #[error("event at t={time} precedes state time {state_time}")]
    OutOfOrder { time: f64, state_time: f64 },

    #[error("non-positive intensity {value} for video {video} at t={time}")]
    NonPositiveIntensity { video: usize, time: f64, value: f64 },

    #[error("non-finite contribution from edge {edge}")]
    NonFinite { edge: usize },

    #[error("exact oracle limited to {limit} binary variables, instance has {vars}; use an LP-relaxation bound instead")]
    InstanceTooLarge { vars: usize, limit: usize },

    #[error("correlation undefined with {0} incorporated steps (need at least 2)")]
    TooFewSteps(u64),

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("sensitivity premise violated: |u - u'| = {gap} exceeds {sensitivity}")]
    PremiseViolated { gap: f64, sensitivity: f64 },

    #[error("unknown policy `{0}` (valid: ppvf, sage, bestfit, mav, lru, lfu)")]
    UnknownPolicy(String),

    #[error("no requests in the test period")]
    NoRequests,

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
