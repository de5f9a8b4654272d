use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty measure: at least one atom is required")]
    EmptyMeasure,
    #[error("points and weights have different lengths ({points} vs {weights})")]
    LengthMismatch { points: usize, weights: usize },
    #[error("weight {index} is invalid: {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("total weight must be positive")]
    ZeroTotalWeight,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate is not finite")]
    NonFiniteCoordinate,
    #[error("point has dimension 0")]
    ZeroDimension,
    #[error("map does not cover source atom {0}")]
    UncoveredAtom(usize),
    #[error("cost exponent must be positive and finite, got {0}")]
    InvalidExponent(f64),
    #[error("invalid distribution descriptor: {0}")]
    InvalidDistribution(String),
    #[error("brute force oracle: {0}")]
    BruteForce(String),
    #[error("monotone solver requires d = 1 and p > 1: {0}")]
    MonotonePrecondition(String),
    #[error("simplex did not terminate within {0} pivots")]
    PivotLimit(usize),
    #[error("invalid parameter family: {0}")]
    InvalidFamily(String),
    #[error("unknown parameter label {0:?}")]
    UnknownLabel(String),
    #[error("point is not an atom of the source measure at {0:?}")]
    NotAnAtom(String),
    #[error("optimal transport at parameter {0:?} is not induced by a unique map")]
    NonUniqueInstance(String),
    #[error("resolution level {0} exceeds the cap of {max}", max = crate::dyadic::MAX_LEVEL)]
    LevelTooLarge(u32),
    #[error("level {0} has not been built")]
    LevelNotBuilt(u32),
    #[error("coordinate {0} is out of range for dyadic indexing at this level")]
    CellOverflow(f64),
    #[error("optimal transport at step {0} is not induced by a unique map")]
    NonUniqueStep(usize),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("invalid integrand: {0}")]
    InvalidField(String),
    #[error("invalid transport plan: {0}")]
    InvalidPlan(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("malformed number {0:?}")]
    ParseNumber(String),
}
