use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty vector")]
    EmptyVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid group structure: {0}")]
    InvalidGroups(String),

    #[error("groups {first:?} and {second:?} overlap on covariate {covariate}")]
    OverlappingGroups {
        first: String,
        second: String,
        covariate: usize,
    },

    #[error("covariate {0} is constant; bandwidth is undefined")]
    DegenerateCovariate(usize),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("group norm collapsed below {guard:e} during fixed-point iteration")]
    GroupNormCollapsed { guard: f64 },

    #[error("singular linear system in group solve")]
    SingularSystem,

    #[error("group {0} is zero; use the threshold check instead")]
    ZeroGroup(usize),

    #[error("covariate index {index} out of range for p = {p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("component function index {0} outside 1..=8")]
    UnknownComponent(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fit failed at lambda = {lambda}: {source}")]
    PathFit {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
