use thiserror::Error;

/// Errors raised while building experiments or reducing their results.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bandit instance needs at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("arm {arm} has mean {mean} outside [0, 1]")]
    MeanOutOfRange { arm: usize, mean: f64 },
    #[error("no unique best arm: arms {first} and {second} share the maximum mean {mean}")]
    NoUniqueBestArm { first: usize, second: usize, mean: f64 },
    #[error("invalid distribution for arm {arm}: {reason}")]
    InvalidDistribution { arm: usize, reason: String },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("invalid policy parameter `{field}`: {reason}")]
    InvalidPolicy { field: &'static str, reason: String },
    #[error("thompson sampling requires Bernoulli arms, but arm {arm} is {kind}")]
    ThompsonNeedsBernoulli { arm: usize, kind: &'static str },
    #[error("{policy} cannot be used in {mode} mode: {reason}")]
    UnsupportedMode {
        policy: &'static str,
        mode: &'static str,
        reason: &'static str,
    },
    #[error("at least {needed} replications required, got {got}")]
    TooFewReplications { needed: usize, got: usize },
    #[error("expected {expected} summaries, got {got}")]
    ModeMismatch { expected: &'static str, got: &'static str },
    #[error("rate curve needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("rate curve horizons must be strictly increasing (at index {0})")]
    HorizonsNotIncreasing(usize),
    #[error(
        "mean regret {value} at horizon {horizon} is not positive; \
         log-log fitting needs positive means, increase the replication count"
    )]
    NonPositiveRegret { horizon: u64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
