use thiserror::Error;

use crate::system::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid compartmental system: {0}")]
    InvalidSystem(ValidationReport),

    #[error("matrix is singular: {0}")]
    SingularMatrix(&'static str),

    #[error("steady state has negative component x*[{index}] = {value}")]
    NegativeSteadyState { index: usize, value: f64 },

    #[error("input vector sums to zero")]
    ZeroInput,

    #[error("rate must be positive, got {0}")]
    NonpositiveRate(f64),

    #[error("not a probability distribution (sum = {sum})")]
    NotADistribution { sum: f64 },

    #[error("path exceeded {cap} jumps")]
    MaxJumpsExceeded { cap: usize },

    #[error("path has zero probability density")]
    ZeroProbabilityPath,

    #[error("target must be positive: {0}")]
    NonpositiveTarget(String),

    #[error("empty feasible set: {0}")]
    EmptyFeasibleSet(String),

    #[error("invalid efficiency: V_s * epsilon / mu_b = {ratio} must exceed 1")]
    InvalidEfficiency { ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad model document: {0}")]
    Document(String),
}
