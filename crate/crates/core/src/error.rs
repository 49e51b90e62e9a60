use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown problem `{name}`; supported: {}", supported.join(", "))]
    UnknownProblem { name: String, supported: Vec<String> },

    #[error("unknown {kind} `{name}`; supported: {}", supported.join(", "))]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        supported: Vec<String>,
    },

    #[error("missing required flag --{0}")]
    MissingFlag(&'static str),

    #[error("degenerate model: predicted decrease {0} is not positive")]
    DegenerateModel(f64),

    #[error("column `{0}` not found in input")]
    MissingColumn(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
