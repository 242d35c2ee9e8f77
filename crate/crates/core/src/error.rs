/// Errors surfaced by the estimation engine and its supporting modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A sampler produced a NaN or infinite value.  These are rejected
    /// eagerly: a single NaN reaching the sample-size search would silently
    /// void the coverage guarantee.
    #[error("non-finite sample value: {0}")]
    NonFiniteSample(f64),

    /// A statistic was requested from fewer observations than it needs.
    #[error("need at least {needed} observations, have {have}")]
    InsufficientData { needed: u64, have: u64 },

    /// An argument fell outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An engine or experiment configuration violated an invariant.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
