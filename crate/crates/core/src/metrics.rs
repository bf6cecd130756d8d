//! Regret, the global treatment effect (GTE) against its difference-in-means
//! (DM) estimate, sign verdicts and the accuracy of single-run comparisons.
//!
//! All reductions run sequentially in replication-index order, so a fixed
//! master seed gives bit-identical estimates regardless of thread count.

use std::fmt;

use crate::error::{Error, Result};
use crate::instance::BanditInstance;
use crate::policies::PolicySpec;
use crate::runner::{
    replicate, run_individual_opts, run_individual_pair, run_joint_opts, run_one_way_opts,
    validate_mode, RunMode, RunOptions, RunTrace, TapePairing,
};

/// One of the two algorithms of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    First,
    Second,
}

impl Slot {
    pub fn index(self) -> usize {
        match self {
            Slot::First => 0,
            Slot::Second => 1,
        }
    }

    pub fn other(self) -> Slot {
        match self {
            Slot::First => Slot::Second,
            Slot::Second => Slot::First,
        }
    }
}

/// `T * best_mean - sum of observed rewards` for the algorithm in `slot`.
pub fn realized_regret(trace: &RunTrace, instance: &BanditInstance, slot: usize) -> f64 {
    trace.horizon as f64 * instance.best_mean() - trace.slots[slot].reward_sum
}

/// `sum_k gap_k * counts_k`.
pub fn pseudo_regret(counts: &[u64], instance: &BanditInstance) -> f64 {
    counts
        .iter()
        .zip(instance.gaps())
        .map(|(&n, g)| n as f64 * g)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotSummary {
    pub realized_regret: f64,
    pub pseudo_regret: f64,
    pub counts: Vec<u64>,
}

/// Regrets of every algorithm in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub mode: RunMode,
    pub seed: u64,
    pub slots: Vec<SlotSummary>,
}

impl ReplicationSummary {
    pub fn from_trace(trace: &RunTrace, instance: &BanditInstance) -> Self {
        let slots = (0..trace.slots.len())
            .map(|i| SlotSummary {
                realized_regret: realized_regret(trace, instance, i),
                pseudo_regret: pseudo_regret(&trace.slots[i].counts, instance),
                counts: trace.slots[i].counts.clone(),
            })
            .collect();
        Self {
            mode: trace.mode,
            seed: trace.seed,
            slots,
        }
    }

    /// Two individual runs viewed as one paired replication.
    pub fn from_pair(first: &RunTrace, second: &RunTrace, instance: &BanditInstance) -> Self {
        let mut s = Self::from_trace(first, instance);
        s.slots
            .extend(Self::from_trace(second, instance).slots);
        s
    }

    pub fn regret(&self, slot: Slot) -> f64 {
        self.slots[slot.index()].realized_regret
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub label: String,
    pub mean: f64,
    pub se: f64,
    pub reps: usize,
}

impl MonteCarloEstimate {
    /// Sample mean and `sd / sqrt(n)` with the unbiased variance.
    pub fn from_samples(label: impl Into<String>, samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::TooFewReplications { needed: 2, got: n });
        }
        let (mean, se) = mean_se(samples);
        Ok(Self {
            label: label.into(),
            mean,
            se,
            reps: n,
        })
    }

    /// Mean of 0/1 (or 1/2 for ties) outcomes with the binomial standard error.
    pub fn proportion(label: impl Into<String>, outcomes: &[f64]) -> Result<Self> {
        let n = outcomes.len();
        if n < 2 {
            return Err(Error::TooFewReplications { needed: 2, got: n });
        }
        let p = outcomes.iter().sum::<f64>() / n as f64;
        Ok(Self {
            label: label.into(),
            mean: p,
            se: (p * (1.0 - p) / n as f64).sqrt(),
            reps: n,
        })
    }

    /// `mean / se`; infinite when the standard error vanishes.
    pub fn z(&self) -> f64 {
        if self.se == 0.0 {
            if self.mean == 0.0 {
                0.0
            } else {
                self.mean.signum() * f64::INFINITY
            }
        } else {
            self.mean / self.se
        }
    }
}

impl fmt::Display for MonteCarloEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {:.4} ± {:.4} (n={})",
            self.label, self.mean, self.se, self.reps
        )
    }
}

/// Mean and standard error; the error is NaN for fewer than two samples.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

/// How a pair of algorithms is replicated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    Individual(TapePairing),
    Joint,
    OneWay,
}

impl PairMode {
    pub fn run_mode(self) -> RunMode {
        match self {
            PairMode::Individual(_) => RunMode::Individual,
            PairMode::Joint => RunMode::Joint,
            PairMode::OneWay => RunMode::OneWay,
        }
    }
}

fn run_pair(
    mode: PairMode,
    spec1: &PolicySpec,
    spec2: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<Vec<RunTrace>> {
    Ok(match mode {
        PairMode::Individual(pairing) => {
            let (a, b) = run_individual_pair(spec1, spec2, instance, horizon, seed, pairing, opts)?;
            vec![a, b]
        }
        PairMode::Joint => vec![run_joint_opts(spec1, spec2, instance, horizon, seed, opts)?],
        PairMode::OneWay => vec![run_one_way_opts(spec1, spec2, instance, horizon, seed, opts)?],
    })
}

fn summarize(traces: &[RunTrace], instance: &BanditInstance) -> ReplicationSummary {
    match traces {
        [one] => ReplicationSummary::from_trace(one, instance),
        [a, b] => ReplicationSummary::from_pair(a, b, instance),
        _ => unreachable!("one or two traces per replication"),
    }
}

/// Replicates a pair of algorithms `reps` times.
pub fn pair_summaries(
    mode: PairMode,
    spec1: &PolicySpec,
    spec2: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    reps: usize,
    master_seed: u64,
) -> Result<Vec<ReplicationSummary>> {
    validate_mode(mode.run_mode(), spec1, Some(spec2), instance)?;
    replicate(reps, master_seed, |seed| {
        run_pair(mode, spec1, spec2, instance, horizon, seed, RunOptions::default())
            .map(|traces| summarize(&traces, instance))
    })
    .into_iter()
    .collect()
}

/// Replicates one algorithm running alone.
pub fn individual_summaries(
    spec: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    reps: usize,
    master_seed: u64,
) -> Result<Vec<ReplicationSummary>> {
    validate_mode(RunMode::Individual, spec, None, instance)?;
    replicate(reps, master_seed, |seed| {
        run_individual_opts(spec, instance, horizon, seed, RunOptions::default())
            .map(|t| ReplicationSummary::from_trace(&t, instance))
    })
    .into_iter()
    .collect()
}

/// Mean realized regret of one slot.
pub fn mean_regret(summaries: &[ReplicationSummary], slot: usize) -> Result<MonteCarloEstimate> {
    let v: Vec<f64> = summaries
        .iter()
        .map(|s| s.slots[slot].realized_regret)
        .collect();
    MonteCarloEstimate::from_samples(format!("regret[{}]", slot + 1), &v)
}

/// Mean pseudo-regret of one slot.
pub fn mean_pseudo_regret(
    summaries: &[ReplicationSummary],
    slot: usize,
) -> Result<MonteCarloEstimate> {
    let v: Vec<f64> = summaries
        .iter()
        .map(|s| s.slots[slot].pseudo_regret)
        .collect();
    MonteCarloEstimate::from_samples(format!("pseudo_regret[{}]", slot + 1), &v)
}

fn require_pairs(summaries: &[ReplicationSummary]) -> Result<()> {
    if let Some(s) = summaries.iter().find(|s| s.slots.len() != 2) {
        return Err(Error::ModeMismatch {
            expected: "two-algorithm",
            got: s.mode.as_str(),
        });
    }
    Ok(())
}

/// Paired difference `R(A1) - R(A2)` over replications, any mode.
pub fn paired_difference(
    summaries: &[ReplicationSummary],
    label: &str,
) -> Result<MonteCarloEstimate> {
    require_pairs(summaries)?;
    let diffs: Vec<f64> = summaries
        .iter()
        .map(|s| s.regret(Slot::First) - s.regret(Slot::Second))
        .collect();
    MonteCarloEstimate::from_samples(label, &diffs)
}

/// Difference-in-means estimate from shared-data replications.
pub fn dm_estimate(summaries: &[ReplicationSummary]) -> Result<MonteCarloEstimate> {
    if let Some(s) = summaries
        .iter()
        .find(|s| !matches!(s.mode, RunMode::Joint | RunMode::OneWay))
    {
        return Err(Error::ModeMismatch {
            expected: "joint or one_way",
            got: s.mode.as_str(),
        });
    }
    paired_difference(summaries, "dm")
}

/// Horizon of the deploy-to-everyone reference runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HorizonConvention {
    /// `2T`: every one of the experiment's `2T` users is served by one algorithm.
    #[default]
    Doubled,
    /// `T`: same horizon as each arm of the experiment.
    Experiment,
}

impl HorizonConvention {
    pub fn horizon(self, experiment_horizon: usize) -> usize {
        match self {
            HorizonConvention::Doubled => 2 * experiment_horizon,
            HorizonConvention::Experiment => experiment_horizon,
        }
    }
}

/// True GTE `E[R(A1)] - E[R(A2)]` from individual runs on shared tapes.
pub fn gte_reference(
    spec1: &PolicySpec,
    spec2: &PolicySpec,
    instance: &BanditInstance,
    experiment_horizon: usize,
    convention: HorizonConvention,
    reps: usize,
    master_seed: u64,
) -> Result<MonteCarloEstimate> {
    let summaries = pair_summaries(
        PairMode::Individual(TapePairing::Shared),
        spec1,
        spec2,
        instance,
        convention.horizon(experiment_horizon),
        reps,
        master_seed,
    )?;
    paired_difference(&summaries, "gte")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Preserved,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Preserved => "preserved",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignVerdict {
    pub verdict: Verdict,
    pub z_gte: f64,
    pub z_dm: f64,
}

/// Compares the signs of the true effect and the DM estimate once both are
/// at least `z_threshold` standard errors away from zero.
pub fn sign_verdict(
    gte: &MonteCarloEstimate,
    dm: &MonteCarloEstimate,
    z_threshold: f64,
) -> SignVerdict {
    let (z_gte, z_dm) = (gte.z(), dm.z());
    // NaN z-scores fail the comparison and stay inconclusive
    let verdict = if z_gte.abs() >= z_threshold && z_dm.abs() >= z_threshold {
        if z_gte.signum() == z_dm.signum() {
            Verdict::Preserved
        } else {
            Verdict::Violated
        }
    } else {
        Verdict::Inconclusive
    };
    SignVerdict {
        verdict,
        z_gte,
        z_dm,
    }
}

/// Fraction of replications in which `true_better` has strictly lower
/// realized regret; exact ties count one half.
pub fn prob_correct_comparison(
    summaries: &[ReplicationSummary],
    true_better: Slot,
) -> Result<MonteCarloEstimate> {
    require_pairs(summaries)?;
    let outcomes: Vec<f64> = summaries
        .iter()
        .map(|s| {
            let (good, other) = (s.regret(true_better), s.regret(true_better.other()));
            if good < other {
                1.0
            } else if good == other {
                0.5
            } else {
                0.0
            }
        })
        .collect();
    MonteCarloEstimate::proportion("prob_correct", &outcomes)
}

/// Estimate of `P(N_best(A | (A, greedy)) <= 4 ln(T) / gap_min^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub estimate: MonteCarloEstimate,
    pub threshold: f64,
    pub horizon: usize,
}

impl TailEstimate {
    /// Ratio of the estimate to `c / T^2`, i.e. the smallest `c` it supports.
    pub fn implied_constant(&self) -> f64 {
        self.estimate.mean * (self.horizon as f64).powi(2)
    }
}

/// Runs `spec` as algorithm 1 jointly with greedy and measures how often its
/// optimal-arm pull count stays at or below `4 ln(T) / gap_min^2`.
pub fn optimal_pull_tail(
    spec: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    reps: usize,
    master_seed: u64,
) -> Result<TailEstimate> {
    let summaries = pair_summaries(
        PairMode::Joint,
        spec,
        &PolicySpec::Greedy,
        instance,
        horizon,
        reps,
        master_seed,
    )?;
    let threshold = 4.0 / instance.min_gap().powi(2) * (horizon as f64).ln();
    let best = instance.best_arm();
    let hits: Vec<f64> = summaries
        .iter()
        .map(|s| {
            if (s.slots[0].counts[best] as f64) <= threshold {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(TailEstimate {
        estimate: MonteCarloEstimate::proportion("optimal_pull_tail", &hits)?,
        threshold,
        horizon,
    })
}

/// Mean cumulative regret after every timestep, per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub slot: usize,
    pub spec: PolicySpec,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub reps: usize,
}

/// Cumulative regret curves for a pair (or, with `spec2 = None`, a single
/// individual algorithm).
pub fn regret_curves(
    mode: PairMode,
    spec1: &PolicySpec,
    spec2: Option<&PolicySpec>,
    instance: &BanditInstance,
    horizon: usize,
    reps: usize,
    master_seed: u64,
) -> Result<Vec<RegretCurve>> {
    validate_mode(mode.run_mode(), spec1, spec2, instance)?;
    let opts = RunOptions::with_steps();
    let best = instance.best_mean();
    let per_rep: Vec<Vec<Vec<f64>>> = replicate(reps, master_seed, |seed| {
        let traces = match spec2 {
            Some(s2) => run_pair(mode, spec1, s2, instance, horizon, seed, opts)?,
            None => vec![run_individual_opts(spec1, instance, horizon, seed, opts)?],
        };
        Ok(traces
            .iter()
            .flat_map(|t| t.slots.iter())
            .map(|s| s.cumulative_regret(best).expect("steps recorded"))
            .collect())
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let specs: Vec<PolicySpec> = std::iter::once(*spec1).chain(spec2.copied()).collect();
    let mut column = vec![0.0; reps];
    Ok(specs
        .iter()
        .enumerate()
        .map(|(slot, spec)| {
            let mut mean = Vec::with_capacity(horizon);
            let mut se = Vec::with_capacity(horizon);
            for t in 0..horizon {
                for (r, rep) in per_rep.iter().enumerate() {
                    column[r] = rep[slot][t];
                }
                let (m, s) = mean_se(&column);
                mean.push(m);
                se.push(s);
            }
            RegretCurve {
                slot,
                spec: *spec,
                mean,
                se,
                reps,
            }
        })
        .collect())
}
