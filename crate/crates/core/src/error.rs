use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, offset {offset}: {message}")]
    Parse {
        line: usize,
        offset: usize,
        message: String,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("vertex {x} equals vertex {y}; expected distinct endpoints")]
    SameVertex { x: usize, y: usize },
    #[error("orientation does not match the graph: {0}")]
    OrientationMismatch(String),
    #[error("invalid vertex ordering: {0}")]
    InvalidOrdering(String),
    #[error("index function has total {total}, expected {expected}")]
    InvalidIndexFunction { total: u64, expected: u64 },
    #[error("index function shape ({vertices} vertices, {edges} edges) does not match graph ({n}, {m})")]
    ShapeMismatch {
        vertices: usize,
        edges: usize,
        n: usize,
        m: usize,
    },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("matrix dimension {dim} exceeds the permanent cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("{0} is not a prime in the supported range")]
    NotPrime(u64),
    #[error("no tabulated prime exceeds {0}")]
    PrimeTableExceeded(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("permanent vanishes modulo {0}; nothing to resolve")]
    VanishingPermanent(u64),
    #[error("invalid list assignment: {0}")]
    InvalidLists(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(line: usize, offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn internal(message: impl Into<String>) -> Self {
        Error::Internal(message.into())
    }
}
