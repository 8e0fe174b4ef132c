use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph is disconnected: vertex `{0}` is not reachable from the root")]
    DisconnectedGraph(String),
    #[error("duplicate id `{0}`")]
    DuplicateEdgeId(String),
    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edges {0} and {1} are not concatenated")]
    NotConcatenated(String, String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("tabulated Hamiltonian is not convex in rho at s = {s}")]
    NonConvexModel { s: f64 },
    #[error("invalid Hamiltonian model: {0}")]
    InvalidModel(String),
    #[error("no Hamiltonian given for edge `{0}`")]
    MissingHamiltonian(String),
    #[error("level {level} is below the fiber minimum {minimum} at s = {s}")]
    LevelBelowMinimum { level: f64, minimum: f64, s: f64 },
    #[error("argument {value} outside the domain [{lower}, +inf)")]
    DomainError { value: f64, lower: f64 },

    #[error("maximizer still on the boundary after expanding the search box to {0}")]
    BoxExpansionLimit(f64),
    #[error("oracle did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("target unreachable within caps: {0}")]
    Unreachable(String),
    #[error("search radius exhausted at {0}")]
    RadiusExhausted(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
