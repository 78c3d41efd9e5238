use thiserror::Error;

use crate::convexity::Verdict;
use crate::expr::ParseError;

/// Failure while evaluating a scalar function at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable x{index} is unbound for a point of dimension {dim}")]
    UnboundVariable { index: usize, dim: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("weight is negative ({value}) at {point:?}")]
    NegativeWeight { value: f64, point: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty vector: dimension must be at least 1")]
    EmptyVector,
    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("degenerate box on axis {axis}: lower {lower} must be strictly below upper {upper}")]
    DegenerateBox { axis: usize, lower: f64, upper: f64 },
    #[error("weight parameter t[{index}] = {value} is outside [0, 1]")]
    WeightOutOfRange { index: usize, value: f64 },
    #[error("dimension {dim} exceeds the corner enumeration limit of {limit}")]
    DimensionLimit { dim: usize, limit: usize },
    #[error("evaluation budget exceeded: {requested} points requested, limit {limit}")]
    BudgetExceeded { requested: f64, limit: u64 },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("weight integral is not positive ({0})")]
    NonPositiveWeightIntegral(f64),
    #[error("weight falsified: {}", .0.describe())]
    WeightRejected(Box<Verdict>),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
