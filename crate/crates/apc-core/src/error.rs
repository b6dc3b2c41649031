use thiserror::Error;

/// Unified error type. The CLI maps these onto exit codes: parse/usage
/// problems → 2, budget exhaustion → 3, failed certificates → 1.
#[derive(Debug, Error)]
pub enum ApcError {
    /// Malformed input file, with 1-based location.
    #[error("parse error at {path}:{line}:{col}: {msg}")]
    Parse {
        path: String,
        line: usize,
        col: usize,
        msg: String,
    },

    /// An operation's stated precondition does not hold for the inputs.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Instance exceeds the configured size/search budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A certifying driver could not verify one of its stages.
    #[error("stage `{stage}` failed to certify: {detail}")]
    Stage { stage: String, detail: String },

    /// A search completed without finding a certifiable witness.
    #[error("search failed: {0}")]
    Search(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ApcError {
    pub fn stage(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        ApcError::Stage {
            stage: stage.into(),
            detail: detail.into(),
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, col: usize, msg: impl Into<String>) -> Self {
        ApcError::Parse {
            path: path.into(),
            line,
            col,
            msg: msg.into(),
        }
    }
}
