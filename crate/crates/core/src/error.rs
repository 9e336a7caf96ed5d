use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bond profile: {0}")]
    Profile(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("the state has zero norm")]
    ZeroState,

    #[error("dense cap exceeded: {requested} > {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("value outside the unit box: {0}")]
    Box(String),

    #[error("invalid problem instance: {0}")]
    Instance(String),

    #[error("gauge completion infeasible: smallest eigenvalue {min_eigenvalue:.3e}")]
    InfeasibleCompletion { min_eigenvalue: f64 },

    #[error("indicator weights infeasible down to gamma = {gamma:.3e}")]
    InfeasibleWeights { gamma: f64 },

    #[error("free tensors are not in embedded form: {0}")]
    Structure(String),

    #[error("unsupported strategy: {0}")]
    UnsupportedStrategy(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed document: {0}")]
    Document(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
