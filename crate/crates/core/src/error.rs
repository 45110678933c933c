use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument, malformed input, or a violated precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A brute-force computation would exceed its configured budget.
    #[error("resource error: {0}")]
    Resource(String),

    /// A learner broke the active-learning query protocol.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// A step of the label-boosting loop could not be carried out.
    #[error("learner failure: {0}")]
    Failure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Whether this error (or the error wrapped by a trial) is a resource error.
    pub fn is_resource(&self) -> bool {
        match self {
            Error::Resource(_) => true,
            Error::Trial { source, .. } => source.is_resource(),
            _ => false,
        }
    }

    pub fn in_trial(self, trial: usize) -> Self {
        Error::Trial {
            trial,
            source: Box::new(self),
        }
    }
}
