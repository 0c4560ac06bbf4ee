use alloc::string::String;

/// Errors raised by the numerical core.
///
/// Display strings start with the variant name; the command line relies on
/// that to print stable diagnostics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("DomainError: {0}")]
    Domain(String),
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("UnsupportedTransform: {0}")]
    UnsupportedTransform(String),
    #[error("UnsupportedDensity: no density for {0}")]
    UnsupportedDensity(&'static str),
    #[error("UnsupportedCdf: no cdf for {0}")]
    UnsupportedCdf(&'static str),
    #[error("UnsupportedQuantile: no quantile for {0}")]
    UnsupportedQuantile(&'static str),
    #[error("NotParametricallyDivisible: {0} has no parametric pieces")]
    NotParametricallyDivisible(&'static str),
    #[error("NotParametricallyDivisible: marginal {} ({family}) has no parametric pieces; fit an approximant first", index + 1)]
    MarginalNotDivisible { index: usize, family: &'static str },
    #[error("InvalidPartition: {0}")]
    InvalidPartition(String),
    #[error("EmptySample")]
    EmptySample,
    #[error("NonPositiveSample: entry {index} is {value}")]
    NonPositiveSample { index: usize, value: f64 },
    #[error("DegenerateSample: {0}")]
    DegenerateSample(&'static str),
    #[error("InsufficientData: {got} points, need at least {needed}")]
    InsufficientData { got: usize, needed: usize },
    #[error("GridTooSmall: {got} points, need at least {needed}")]
    GridTooSmall { got: usize, needed: usize },
    #[error("Infeasible: {0}")]
    Infeasible(String),
    #[error("NotConverged: {0}")]
    NotConverged(String),
    #[error("RowSumViolation row {} (sum={sum})", row + 1)]
    RowSumViolation { row: usize, sum: f64 },
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("LengthMismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
