use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("particle count {0} is out of range (need n >= 3)")]
    TooFewParticles(usize),
    #[error("particle count {n} exceeds the supported maximum {max}")]
    TooManyParticles { n: usize, max: usize },
    #[error("mismatched particle counts {0} and {1}")]
    Mismatch(usize, usize),
    #[error("particle index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("parameter {name} = {value} outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: String },
    #[error("negative probability {value} for setting {setting}, outcome {outcome}")]
    NegativeProbability {
        setting: String,
        outcome: String,
        value: String,
    },
    #[error("dense oracle: joint +1 eigenspace has dimension {0}, expected 1")]
    EigenspaceDimension(usize),
    #[error("click rates are not symmetric: {a} vs {b}")]
    AsymmetricClickRates { a: String, b: String },
    #[error("particle permutation {0:?} does not preserve the target table")]
    PermutationNotSymmetry(Vec<usize>),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("weights must be non-negative and sum to 1 (sum = {0})")]
    BadWeights(String),
    #[error("linear program: {0}")]
    Solver(String),
    #[error("no fixture for n = {0} (available: 3, 4, 5)")]
    NoFixture(usize),
    #[error("fixture completion for n = {0} is infeasible")]
    FixtureInfeasible(usize),
    #[error("insufficient statistics for term {term}: {events} all-click events (< {needed})")]
    InsufficientStatistics {
        term: String,
        events: u64,
        needed: u64,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
