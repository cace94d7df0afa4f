use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NonlinearityError {
    #[error("cannot parse nonlinearity at `{token}`: {reason}")]
    Parse { token: String, reason: &'static str },
    #[error("parameter {param} = {value} out of range, expected {allowed}")]
    Range {
        param: &'static str,
        value: f64,
        allowed: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("recursion denominator vanishes at ladder index {index}")]
    VanishingDenominator { index: u64 },
    #[error("non-finite matrix element at ladder index {index}")]
    NonFinite { index: u64 },
    #[error(
        "continued fraction for B_{n} has a zero denominator at level {level} (depth {depth})"
    )]
    Pole { n: u64, level: u64, depth: u64 },
    #[error("state has zero total weight over the truncated ladder")]
    Degenerate,
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl BuildError {
    /// Ladder index at which construction failed, if the failure is local.
    pub fn index(&self) -> Option<u64> {
        match *self {
            Self::VanishingDenominator { index } | Self::NonFinite { index } => Some(index),
            Self::Pole { level, .. } => Some(level),
            Self::Degenerate | Self::Precondition(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HusimiError {
    #[error("precondition violated: {0}")]
    Precondition(String),
}
