use thiserror::Error;

use crate::eval::EvalError;
use crate::features::FeatureError;
use crate::forest::ForestError;
use crate::signal_io::SignalError;
use crate::wflc::FilterError;

/// Any pipeline failure, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signal_io: {0}")]
    Signal(#[from] SignalError),
    #[error("wflc_filter: {0}")]
    Filter(#[from] FilterError),
    #[error("features: {0}")]
    Feature(#[from] FeatureError),
    #[error("forest: {0}")]
    Forest(#[from] ForestError),
    #[error("eval: {0}")]
    Eval(#[from] EvalError),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
