use thiserror::Error;

pub type Result<T> = std::result::Result<T, RocError>;

#[derive(Debug, Error)]
pub enum RocError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no draws")]
    NoDraws,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("all prior mass is zero on the grid")]
    ZeroPrior,

    #[error("elicitation: {0}")]
    Elicitation(String),

    #[error("iteration did not converge after {iterations} iterations (last iterate {last})")]
    NonConvergence { iterations: usize, last: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("data error at line {line}: {msg}")]
    DataLine { line: usize, msg: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("monte carlo diagnostic failure: {0}")]
    Diagnostic(String),

    #[error("{module}: {source}")]
    Context {
        module: &'static str,
        #[source]
        source: Box<RocError>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl RocError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RocError::InvalidInput(msg.into())
    }

    /// Wraps the error with the name of the module that raised it.
    pub fn in_module(self, module: &'static str) -> Self {
        match self {
            e @ RocError::Context { .. } => e,
            e => RocError::Context {
                module,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 2 config, 3 data, 4 Monte Carlo diagnostics, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RocError::Context { source, .. } => source.exit_code(),
            RocError::Config(_) | RocError::InvalidInput(_) | RocError::Elicitation(_) => 2,
            RocError::NonConvergence { .. } => 2,
            RocError::DataLine { .. } | RocError::Data(_) | RocError::Csv(_) => 3,
            RocError::Diagnostic(_) => 4,
            _ => 1,
        }
    }
}
