use thiserror::Error;

use crate::model::FeasibilityReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("need at least as many users as clusters (users = {users}, clusters = {clusters})")]
    TooFewUsers { users: usize, clusters: usize },

    #[error("invalid permutation of {len} points")]
    InvalidPermutation { len: usize },

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("no feasible point found ({} violations)", .0.violations.len())]
    Infeasible(FeasibilityReport),
}

pub type Result<T> = std::result::Result<T, Error>;
