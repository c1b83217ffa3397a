use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid diagram point: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{what} of {requested} exceeds the cap of {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("no feasible assignment: {0}")]
    Infeasible(String),

    #[error("state has {found} qubits but the graph needs {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("property check failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Parameter(_) => "parameter",
            Error::Capacity { .. } => "capacity",
            Error::Infeasible(_) => "infeasible",
            Error::DimensionMismatch { .. } => "dimension",
            Error::Verification(_) => "verification",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
