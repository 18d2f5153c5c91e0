use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("at least 3 vertices are required, got {0}")]
    TooFewVertices(usize),

    #[error("finite discrete regime requires r >= 2, got {0}")]
    InvalidLevels(u32),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("degree entry {index} is {value}; entries must be finite and nonnegative")]
    InvalidDegree { index: usize, value: f64 },

    #[error("degree entry {index} is {value}; discrete regimes require integers")]
    NonIntegralDegree { index: usize, value: f64 },

    #[error("degree entry {index} is {value}; fitting requires strictly positive degrees")]
    NonPositiveDegree { index: usize, value: f64 },

    #[error("edge ({i}, {j}) is invalid for a graph on {n} vertices")]
    InvalidEdge { i: usize, j: usize, n: usize },

    #[error("weight {weight} on edge ({i}, {j}) is outside the weight set of the {regime} regime")]
    WeightOutOfRange {
        i: usize,
        j: usize,
        weight: f64,
        regime: String,
    },

    #[error("potentials are outside the natural parameter space of the {0} regime")]
    InvalidPotentials(String),

    #[error("t = {t} is outside the interior of the domain of Z1 for the {regime} regime")]
    Domain { t: f64, regime: String },

    #[error("mean value {m} is outside the range of the mean function for the {regime} regime")]
    MeanOutOfRange { m: f64, regime: String },

    #[error("operation is not supported for the {0} regime")]
    UnsupportedRegime(String),

    #[error("no MLE exists: the degree sequence is not in the interior of the mean parameter space")]
    NoMle,

    #[error("brute-force search refused: {0}")]
    SearchRefused(String),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("linear solve failed: Hessian is not positive definite")]
    Singular,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
