//! Monte Carlo simulation of multi-armed bandit algorithms compared through
//! A/B experiments in which both arms of the experiment train on one shared
//! pool of data.
//!
//! The crate is organised bottom-up:
//!
//! - [`instance`], [`tape`], [`history`]: the environment, pre-sampled reward
//!   tapes and the per-arm statistics policies consume;
//! - [`policies`]: greedy, epsilon-greedy, UCB, EXP3 and Thompson sampling;
//! - [`runner`]: individual, two-way shared and one-way shared runs;
//! - [`metrics`]: regret, the true effect vs the difference-in-means estimate,
//!   sign verdicts and comparison accuracy;
//! - [`ratefit`]: log-log growth-rate classification of regret curves.

pub mod error;
pub mod history;
pub mod instance;
pub mod metrics;
pub mod policies;
pub mod ratefit;
pub mod runner;
pub mod seeding;
pub mod tape;

pub use error::{Error, Result};
pub use history::SharedHistory;
pub use instance::{ArmDistribution, BanditInstance, DistributionKind};
pub use metrics::{MonteCarloEstimate, ReplicationSummary, SignVerdict, Verdict};
pub use policies::{PolicySpec, StepKind};
pub use ratefit::{GrowthClassification, GrowthLabel, RateCurve};
pub use runner::{RunMode, RunOptions, RunTrace, TapePairing};
pub use tape::RewardTape;
