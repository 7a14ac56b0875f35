use thiserror::Error;

/// Errors raised by the qaixi library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A configured bound (horizon, branching, brute-force size) was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Every hypothesis assigned (near) zero probability to the observed outcome.
    #[error("impossible observation: outcome {outcome} of action `{action}` has zero probability under every hypothesis")]
    ImpossibleObservation { action: String, outcome: usize },

    /// Experiment or environment configuration could not be used.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
