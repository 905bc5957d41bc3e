use thiserror::Error;

/// Errors raised by the walk engine, the exact oracles and the ensemble runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid walk parameters: {0}")]
    InvalidParams(String),

    #[error("invalid memory schedule: {0}")]
    InvalidSchedule(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration horizon n={n} exceeds the cap of {cap} steps")]
    EnumerationCap { n: u64, cap: u64 },

    #[error("step budget exceeded: {requested} walk steps requested, limit is {limit}")]
    Budget { requested: u128, limit: u128 },

    #[error("limit cdf unavailable: {0}")]
    CdfUnavailable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
