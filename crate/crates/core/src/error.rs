use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed log at line {line}: {reason}")]
    MalformedLog { line: usize, reason: String },

    #[error("unsupported log schema version {found} (expected {expected})")]
    SchemaMismatch { found: u32, expected: u32 },

    #[error("no pending cue decision for slot {slot}")]
    NoPendingDecision { slot: usize },

    #[error("invalid orientation map: {0}")]
    InvalidOrientation(String),

    #[error("slot index {0} out of range")]
    InvalidSlot(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
