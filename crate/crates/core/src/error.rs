use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("matrix [[{a},{b}],[{c},{d}]] does not have determinant 1 mod {n}")]
    NotInGroup { a: u32, b: u32, c: u32, d: u32, n: u32 },

    #[error("slice size {requested} outside [1, {available}]")]
    SliceOutOfRange { requested: usize, available: usize },

    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    NodeOutOfRange { index: usize, num_nodes: usize },

    #[error("edge ({0}, {1}) is not in the graph")]
    EdgeNotFound(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph is not regular")]
    NotRegular,

    #[error("graph is empty")]
    EmptyGraph,

    #[error("graph has {num_nodes} nodes; exact enumeration is limited to {limit}")]
    TooLarge { num_nodes: usize, limit: usize },

    #[error("iteration did not converge within {0} steps")]
    NoConvergence(usize),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("idleness must lie in [0, 1), got {0}")]
    InvalidIdleness(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("generator alphabets differ")]
    AlphabetMismatch,

    #[error("ball radius {radius} exceeds the limit {limit}")]
    RadiusTooLarge { radius: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
