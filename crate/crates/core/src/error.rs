// SPDX-License-Identifier: Apache-2.0
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("invalid forest: {0}")]
    InvalidForest(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("enumeration budget exceeded: {needed} states needed, budget is {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },

    #[error("set budget exceeded: more than {budget} members")]
    SetBudgetExceeded { budget: u64 },

    #[error("mismatched spaces: {0}")]
    MismatchedSpaces(String),

    #[error("empty set")]
    EmptySet,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unsatisfiable constraints: {0}")]
    Unsatisfiable(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable reason code.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::MalformedTree(_) => "malformed-tree",
            Error::InvalidForest(_) => "invalid-forest",
            Error::InvalidInput(_) => "invalid-input",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::SetBudgetExceeded { .. } => "set-budget-exceeded",
            Error::MismatchedSpaces(_) => "mismatched-spaces",
            Error::EmptySet => "empty set",
            Error::InvalidDistribution(_) => "invalid-distribution",
            Error::Unsatisfiable(_) => "unsatisfiable",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
        }
    }
}
