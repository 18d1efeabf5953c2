use std::fmt;

use thiserror::Error;

/// Which side of the transport problem a marginal belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Source => f.write_str("source"),
            Side::Target => f.write_str("target"),
        }
    }
}

/// A single invariant violation found while validating an instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationIssue {
    #[error("row {0} is entirely forbidden by the zero pattern")]
    ZeroRowInPattern(usize),
    #[error("column {0} is entirely forbidden by the zero pattern")]
    ZeroColumnInPattern(usize),
    #[error("{side} marginal entry {index} is not strictly positive ({value})")]
    NonpositiveMarginal {
        side: Side,
        index: usize,
        value: f64,
    },
    #[error("{field}: expected {expected}, found {found}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("ideal plan entry ({i}, {j}) is not strictly positive ({value})")]
    NonpositiveIdealEntry { i: usize, j: usize, value: f64 },
    #[error("cost entry ({i}, {j}) is not finite")]
    NonfiniteCost { i: usize, j: usize },
    #[error("forbidden pair ({i}, {j}) is out of range")]
    PairOutOfRange { i: usize, j: usize },
    #[error("forbidden pair ({i}, {j}) is listed more than once")]
    DuplicatePair { i: usize, j: usize },
    #[error("{name} must be a positive finite real, got {value}")]
    NonpositiveConstant { name: &'static str, value: f64 },
    #[error("problem dimensions must be at least 1 (m = {m}, n = {n})")]
    EmptyDimension { m: usize, n: usize },
}

/// Every violation found in one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InvalidInstance(pub Vec<ValidationIssue>);

impl fmt::Display for InvalidInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance ({} issue(s))", self.0.len())?;
        for issue in &self.0 {
            write!(f, "; {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for InvalidInstance {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Invalid(#[from] InvalidInstance),
    #[error("kernel entry ({i}, {j}) underflows to zero; raise gamma0 or rescale the costs")]
    KernelUnderflow { i: usize, j: usize },
    #[error("marginals are unbalanced: sum(u) = {source_mass}, sum(v) = {target_mass}")]
    UnbalancedInput { source_mass: f64, target_mass: f64 },
    #[error("the Chizat iteration requires an empty zero pattern")]
    UnsupportedPattern,
    #[error("the Chizat iteration requires an all-ones ideal plan")]
    UnsupportedIdeal,
    #[error("argument outside the domain of {0}")]
    Domain(&'static str),
    #[error("operands do not share the same dimensions and zero pattern")]
    PatternMismatch,
    #[error("instance too large for the brute-force oracle ({0})")]
    TooLarge(String),
    #[error("could not sample a covering zero pattern in {attempts} attempts")]
    PatternSamplingFailed { attempts: usize },
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
