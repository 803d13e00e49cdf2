use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate cell {cell}: signed area {area:e}")]
    DegenerateCell { cell: usize, area: f64 },
    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("unsupported quadrature degree {0} (max 10)")]
    UnsupportedDegree(usize),
    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },
    #[error("spaces are defined on different meshes")]
    MeshMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular: zero pivot in column {column}")]
    SingularMatrix { column: usize },
    #[error("matrix is not positive definite (pivot {pivot} in row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("dense path limited to {limit} unknowns, got {size}")]
    TooLarge { size: usize, limit: usize },
    #[error("missing boundary value for constrained dof {0}")]
    MissingBoundaryValue(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time step does not divide final time: n={n}, rule {rule} gives T/tau = {ratio}")]
    NonIntegralSteps { n: usize, rule: String, ratio: f64 },
    #[error("case {0} has no Neumann boundary")]
    NoNeumannBoundary(String),
    #[error("undefined order: errors must be positive (coarse {coarse:e}, fine {fine:e})")]
    UndefinedOrder { coarse: f64, fine: f64 },
    #[error("study level {level}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
