//! Arm-selection rules.
//!
//! Greedy, epsilon-greedy and UCB are pure functions of the per-arm counts
//! and sums in a [`SharedHistory`]; Thompson sampling adds a private prior;
//! EXP3 keeps private importance-weighted estimates and ignores the shared
//! history entirely.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::history::{argmax, SharedHistory};
use crate::instance::sample_beta;

/// Algorithm plus parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    Greedy,
    /// Explores uniformly with probability `min{1, c / |H|^(1 - alpha)}`.
    EGreedy { alpha: f64, c: f64 },
    /// Optimism with radius `sqrt(2 (|H|^alpha - 1) / (alpha n_k))`.
    Ucb { alpha: f64 },
    Exp3,
    /// Beta-Bernoulli Thompson sampling. The first arm gets the prior
    /// `Beta(m (1 - gamma), m gamma)`, every other arm `Beta(m gamma, m (1 - gamma))`.
    Thompson { prior_size: f64, prior_skew: f64 },
}

impl PolicySpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |field: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidPolicy {
                    field,
                    reason: format!("must lie in [0, 1], got {v}"),
                })
            }
        };
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidPolicy {
                    field,
                    reason: format!("must be a positive finite number, got {v}"),
                })
            }
        };
        match *self {
            PolicySpec::Greedy | PolicySpec::Exp3 => Ok(()),
            PolicySpec::EGreedy { alpha, c } => {
                unit("alpha", alpha)?;
                positive("C", c)
            }
            PolicySpec::Ucb { alpha } => unit("alpha", alpha),
            PolicySpec::Thompson {
                prior_size,
                prior_skew,
            } => {
                positive("m", prior_size)?;
                unit("gamma", prior_skew)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PolicySpec::Greedy => "greedy",
            PolicySpec::EGreedy { .. } => "egreedy",
            PolicySpec::Ucb { .. } => "ucb",
            PolicySpec::Exp3 => "exp3",
            PolicySpec::Thompson { .. } => "thompson",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            PolicySpec::EGreedy { alpha, .. } | PolicySpec::Ucb { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn c(&self) -> Option<f64> {
        match *self {
            PolicySpec::EGreedy { c, .. } => Some(c),
            _ => None,
        }
    }

    pub fn prior_size(&self) -> Option<f64> {
        match *self {
            PolicySpec::Thompson { prior_size, .. } => Some(prior_size),
            _ => None,
        }
    }

    pub fn prior_skew(&self) -> Option<f64> {
        match *self {
            PolicySpec::Thompson { prior_skew, .. } => Some(prior_skew),
            _ => None,
        }
    }

    /// Whether the policy decides from the shared history.
    pub fn reads_history(&self) -> bool {
        !matches!(self, PolicySpec::Exp3)
    }

    pub fn build(&self, num_arms: usize) -> Result<PolicyState> {
        self.validate()?;
        Ok(match *self {
            PolicySpec::Greedy => PolicyState::Greedy,
            PolicySpec::EGreedy { alpha, c } => PolicyState::EGreedy { alpha, c },
            PolicySpec::Ucb { alpha } => PolicyState::Ucb { alpha },
            PolicySpec::Exp3 => PolicyState::Exp3(Exp3State::new(num_arms)),
            PolicySpec::Thompson {
                prior_size,
                prior_skew,
            } => PolicyState::Thompson(ThompsonState::skewed(num_arms, prior_size, prior_skew)),
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PolicySpec::Greedy => write!(f, "greedy"),
            PolicySpec::EGreedy { alpha, c } => write!(f, "egreedy(alpha={alpha},C={c})"),
            PolicySpec::Ucb { alpha } => write!(f, "ucb(alpha={alpha})"),
            PolicySpec::Exp3 => write!(f, "exp3"),
            PolicySpec::Thompson {
                prior_size,
                prior_skew,
            } => write!(f, "thompson(m={prior_size},gamma={prior_skew})"),
        }
    }
}

/// Why an arm was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// Some arm had no shared samples.
    Forced,
    /// Uniform exploration step of epsilon-greedy.
    Explore,
    /// The policy's main rule (argmax, optimism, posterior or EXP3 draw).
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub arm: usize,
    pub kind: StepKind,
    /// Probability with which the arm was drawn, when the policy knows it.
    pub probability: Option<f64>,
}

impl Decision {
    fn new(arm: usize, kind: StepKind) -> Self {
        Self {
            arm,
            kind,
            probability: None,
        }
    }
}

/// A bandit algorithm as seen by the runners.
pub trait Policy {
    /// Chooses an arm given the history visible to this policy.
    fn select(&mut self, history: &SharedHistory, rng: &mut ChaCha8Rng) -> Decision;

    /// Feedback for the policy's own pull.
    fn observe(&mut self, _decision: &Decision, _reward: f64) {}
}

/// Arm with the highest empirical mean; unsampled arms count as `+inf`.
pub fn greedy_select(history: &SharedHistory) -> usize {
    argmax((0..history.num_arms()).map(|k| history.empirical_mean(k)))
}

/// `min{1, c / total^(1 - alpha)}`.
pub fn exploration_rate(total_samples: u64, alpha: f64, c: f64) -> f64 {
    debug_assert!(total_samples >= 1);
    (c / (total_samples as f64).powf(1.0 - alpha)).min(1.0)
}

pub fn egreedy_select(
    history: &SharedHistory,
    alpha: f64,
    c: f64,
    rng: &mut ChaCha8Rng,
) -> (usize, StepKind) {
    if let Some(arm) = history.first_unsampled() {
        return (arm, StepKind::Forced);
    }
    let eps = exploration_rate(history.total(), alpha, c);
    if rng.random::<f64>() < eps {
        (rng.random_range(0..history.num_arms()), StepKind::Explore)
    } else {
        (greedy_select(history), StepKind::Greedy)
    }
}

/// UCB bonus `sqrt(2 (total^alpha - 1) / (alpha n))`, with the `alpha -> 0`
/// limit `sqrt(2 ln(total) / n)`.
pub fn confidence_radius(total_samples: u64, arm_samples: u64, alpha: f64) -> f64 {
    assert!(total_samples >= 1, "confidence radius needs a nonempty history");
    assert!(arm_samples >= 1, "confidence radius needs a sampled arm");
    let ln_total = (total_samples as f64).ln();
    // exp_m1 keeps (total^alpha - 1) / alpha accurate as alpha -> 0
    let growth = if alpha == 0.0 {
        ln_total
    } else {
        (alpha * ln_total).exp_m1() / alpha
    };
    (2.0 * growth / arm_samples as f64).sqrt()
}

pub fn ucb_select(history: &SharedHistory, alpha: f64) -> (usize, StepKind) {
    if let Some(arm) = history.first_unsampled() {
        return (arm, StepKind::Forced);
    }
    let total = history.total();
    let arm = argmax((0..history.num_arms()).map(|k| {
        history.empirical_mean(k) + confidence_radius(total, history.count(k), alpha)
    }));
    (arm, StepKind::Greedy)
}

/// EXP3 exploration floor `min{1/K, K^(-2/3) t^(-1/3)}`.
pub fn exp3_rate(t: u64, num_arms: usize) -> f64 {
    let k = num_arms as f64;
    (1.0 / k).min(k.powf(-2.0 / 3.0) * (t as f64).powf(-1.0 / 3.0))
}

/// EXP3 with importance-weighted cumulative reward estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp3State {
    estimates: Vec<f64>,
    prev_rate: f64,
    current_rate: f64,
    t: u64,
}

impl Exp3State {
    pub fn new(num_arms: usize) -> Self {
        Self {
            estimates: vec![0.0; num_arms],
            prev_rate: 0.0,
            current_rate: 0.0,
            t: 0,
        }
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    /// Timesteps selected so far.
    pub fn timestep(&self) -> u64 {
        self.t
    }

    /// Sampling distribution at timestep `t` given the current estimates.
    pub fn probabilities(&self, t: u64) -> Vec<f64> {
        let k = self.estimates.len();
        let rate = exp3_rate(t, k);
        let logits: Vec<f64> = self.estimates.iter().map(|y| self.prev_rate * y).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let norm: f64 = weights.iter().sum();
        let mix = 1.0 - k as f64 * rate;
        weights.iter().map(|w| mix * w / norm + rate).collect()
    }

    /// Advances to the next timestep and draws an arm.
    pub fn select(&mut self, rng: &mut ChaCha8Rng) -> (usize, f64) {
        self.t += 1;
        self.current_rate = exp3_rate(self.t, self.estimates.len());
        let probs = self.probabilities(self.t);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut arm = probs.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                arm = k;
                break;
            }
        }
        (arm, probs[arm])
    }

    /// Importance-weighted update for the arm just pulled.
    pub fn update(&mut self, arm: usize, reward: f64, probability: f64) {
        assert!(probability > 0.0, "EXP3 update needs a positive sampling probability");
        self.estimates[arm] += reward / probability;
        self.prev_rate = self.current_rate;
    }
}

/// Per-arm Beta prior of one Thompson sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ThompsonState {
    prior_a: Vec<f64>,
    prior_b: Vec<f64>,
}

impl ThompsonState {
    pub fn new(prior_a: Vec<f64>, prior_b: Vec<f64>) -> Self {
        assert_eq!(prior_a.len(), prior_b.len());
        Self { prior_a, prior_b }
    }

    /// `Beta(1, 1)` on every arm.
    pub fn uniform(num_arms: usize) -> Self {
        Self::new(vec![1.0; num_arms], vec![1.0; num_arms])
    }

    pub fn skewed(num_arms: usize, prior_size: f64, prior_skew: f64) -> Self {
        let favoured = (prior_size * (1.0 - prior_skew), prior_size * prior_skew);
        let other = (prior_size * prior_skew, prior_size * (1.0 - prior_skew));
        let (a, b) = (0..num_arms)
            .map(|k| if k == 0 { favoured } else { other })
            .unzip();
        Self::new(a, b)
    }

    pub fn prior(&self, arm: usize) -> (f64, f64) {
        (self.prior_a[arm], self.prior_b[arm])
    }

    /// Posterior draw per arm: `Beta(a + successes, b + failures)`.
    pub fn sample_posteriors(&self, history: &SharedHistory, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..history.num_arms())
            .map(|k| {
                sample_beta(
                    self.prior_a[k] + history.successes(k) as f64,
                    self.prior_b[k] + history.failures(k) as f64,
                    rng,
                )
            })
            .collect()
    }

    pub fn select(&self, history: &SharedHistory, rng: &mut ChaCha8Rng) -> (usize, StepKind) {
        if let Some(arm) = history.first_unsampled() {
            return (arm, StepKind::Forced);
        }
        (argmax(self.sample_posteriors(history, rng)), StepKind::Greedy)
    }
}

/// Runtime state of a [`PolicySpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyState {
    Greedy,
    EGreedy { alpha: f64, c: f64 },
    Ucb { alpha: f64 },
    Exp3(Exp3State),
    Thompson(ThompsonState),
}

impl Policy for PolicyState {
    fn select(&mut self, history: &SharedHistory, rng: &mut ChaCha8Rng) -> Decision {
        match self {
            PolicyState::Greedy => {
                let kind = if history.first_unsampled().is_some() {
                    StepKind::Forced
                } else {
                    StepKind::Greedy
                };
                Decision::new(greedy_select(history), kind)
            }
            PolicyState::EGreedy { alpha, c } => {
                let (arm, kind) = egreedy_select(history, *alpha, *c, rng);
                Decision::new(arm, kind)
            }
            PolicyState::Ucb { alpha } => {
                let (arm, kind) = ucb_select(history, *alpha);
                Decision::new(arm, kind)
            }
            PolicyState::Exp3(state) => {
                let (arm, p) = state.select(rng);
                Decision {
                    arm,
                    kind: StepKind::Greedy,
                    probability: Some(p),
                }
            }
            PolicyState::Thompson(state) => {
                let (arm, kind) = state.select(history, rng);
                Decision::new(arm, kind)
            }
        }
    }

    fn observe(&mut self, decision: &Decision, reward: f64) {
        if let PolicyState::Exp3(state) = self {
            let p = decision
                .probability
                .expect("EXP3 decisions carry their sampling probability");
            state.update(decision.arm, reward, p);
        }
    }
}
