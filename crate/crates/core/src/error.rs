use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("unsupported density family: {0}")]
    UnsupportedFamily(String),

    #[error("no finite ratio constant: {0}")]
    NoFiniteRatio(String),

    #[error("invalid tolerance {0}: must be positive")]
    InvalidTolerance(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `∫ m(x)^k dx = ∞`, so the subgraph count is almost surely infinite.
    #[error(
        "not integrable: ∫ m(x)^{k} dx diverges in dimension {d} (power-law needs k·gamma > d), \
         so the count of order {k} is almost surely infinite"
    )]
    NotIntegrable { k: usize, d: usize },

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("template has {0} vertices; at most 8 are supported")]
    TemplateTooLarge(usize),

    #[error("brute-force oracle refused: {0} points exceeds the limit of 60")]
    OracleTooLarge(usize),

    #[error("vertex index {index} out of range for graph with {len} vertices")]
    InvalidIndex { index: usize, len: usize },

    #[error("invalid connection set: {0}")]
    InvalidConnectionSet(String),

    #[error("insufficient tail curve: {0}")]
    InsufficientSpan(String),

    #[error("empty sample")]
    EmptySample,

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
