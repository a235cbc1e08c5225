use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Dimension mismatch or otherwise malformed object.
    #[error("structural error: {0}")]
    Structural(String),

    /// A value outside the domain of an operation (e.g. a strategy the player
    /// cannot play).
    #[error("domain error: {0}")]
    Domain(String),

    /// A load outside the bounded table of a table-backed cost model.
    #[error("range error: {0}")]
    Range(String),

    /// API misuse, e.g. a player-specific model evaluated without a player.
    #[error("usage error: {0}")]
    Usage(String),

    /// An operation's mathematical precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Enumeration would exceed the configured cap.
    #[error("capacity exceeded: {what} (limit {limit})")]
    Capacity { what: String, limit: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("incompatible cost models: {0}")]
    Incompatible(String),

    /// A result contradicting a theorem-backed invariant; indicates a bug or a
    /// mis-specified input (e.g. a ν table that does not witness local
    /// monotonicity).
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn capacity(what: impl Into<String>, limit: u64) -> Self {
        Error::Capacity { what: what.into(), limit }
    }
}
