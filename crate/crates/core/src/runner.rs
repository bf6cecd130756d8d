//! Individual runs, two-way shared-data runs and one-way sharing.
//!
//! Within a timestep every policy decides on the history as it stood before
//! the timestep, then rewards are drawn from the tape (algorithm 1 first) and
//! only then appended to the history.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::history::SharedHistory;
use crate::instance::BanditInstance;
use crate::policies::{Decision, Policy, PolicySpec, StepKind};
use crate::seeding::{replication_seed, stream_rng, Stream};
use crate::tape::RewardTape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunMode {
    Individual,
    Joint,
    OneWay,
}

impl RunMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Individual => "individual",
            RunMode::Joint => "joint",
            RunMode::OneWay => "one_way",
        }
    }
}

/// How the tapes of two individual runs relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TapePairing {
    /// Both runs read the same tape (common random numbers).
    #[default]
    Shared,
    /// The second run reads a tape from an independent stream.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Keep the per-timestep arm and reward sequences.
    pub record_steps: bool,
}

impl RunOptions {
    pub fn with_steps() -> Self {
        Self { record_steps: true }
    }
}

/// What one algorithm did during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotTrace {
    pub spec: PolicySpec,
    /// Arm pulled at each timestep (empty unless steps were recorded).
    pub arms: Vec<usize>,
    /// Reward observed at each timestep (empty unless steps were recorded).
    pub rewards: Vec<f64>,
    pub reward_sum: f64,
    pub counts: Vec<u64>,
    pub forced_steps: u64,
    pub explore_steps: u64,
}

impl SlotTrace {
    fn new(spec: PolicySpec, num_arms: usize, horizon: usize, opts: RunOptions) -> Self {
        let cap = if opts.record_steps { horizon } else { 0 };
        Self {
            spec,
            arms: Vec::with_capacity(cap),
            rewards: Vec::with_capacity(cap),
            reward_sum: 0.0,
            counts: vec![0; num_arms],
            forced_steps: 0,
            explore_steps: 0,
        }
    }

    fn push(&mut self, decision: &Decision, reward: f64, opts: RunOptions) {
        self.counts[decision.arm] += 1;
        self.reward_sum += reward;
        match decision.kind {
            StepKind::Forced => self.forced_steps += 1,
            StepKind::Explore => self.explore_steps += 1,
            StepKind::Greedy => {}
        }
        if opts.record_steps {
            self.arms.push(decision.arm);
            self.rewards.push(reward);
        }
    }

    pub fn pulls(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Realized regret after each timestep, `t * best_mean - sum_{s <= t} Y_s`.
    /// `None` when steps were not recorded.
    pub fn cumulative_regret(&self, best_mean: f64) -> Option<Vec<f64>> {
        if self.rewards.len() as u64 != self.pulls() {
            return None;
        }
        let mut acc = 0.0;
        Some(
            self.rewards
                .iter()
                .enumerate()
                .map(|(i, y)| {
                    acc += y;
                    (i + 1) as f64 * best_mean - acc
                })
                .collect(),
        )
    }
}

/// Result of one run. Slot 0 is algorithm 1 (the source in one-way mode).
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub mode: RunMode,
    pub horizon: usize,
    pub seed: u64,
    pub slots: Vec<SlotTrace>,
    /// Pulls per arm across all slots.
    pub combined_counts: Vec<u64>,
    /// Tape cells consumed per arm.
    pub tape_consumed: Vec<usize>,
}

fn check_spec(spec: &PolicySpec, instance: &BanditInstance) -> Result<()> {
    spec.validate()?;
    if let PolicySpec::Thompson { .. } = spec {
        if let Some((arm, kind)) = instance.non_bernoulli_arm() {
            return Err(Error::ThompsonNeedsBernoulli { arm, kind });
        }
    }
    Ok(())
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        Err(Error::ZeroHorizon)
    } else {
        Ok(())
    }
}

/// Rejects spec combinations a run mode cannot execute.
pub fn validate_mode(
    mode: RunMode,
    spec1: &PolicySpec,
    spec2: Option<&PolicySpec>,
    instance: &BanditInstance,
) -> Result<()> {
    check_spec(spec1, instance)?;
    if let Some(s) = spec2 {
        check_spec(s, instance)?;
    }
    let exp3_reason = "its importance weights are undefined for samples it did not draw";
    match mode {
        RunMode::Individual => Ok(()),
        RunMode::Joint => {
            if !spec1.reads_history() || spec2.is_some_and(|s| !s.reads_history()) {
                Err(Error::UnsupportedMode {
                    policy: "exp3",
                    mode: "joint",
                    reason: exp3_reason,
                })
            } else {
                Ok(())
            }
        }
        RunMode::OneWay => match spec2 {
            Some(sink) if !sink.reads_history() => Err(Error::UnsupportedMode {
                policy: "exp3",
                mode: "one_way sink",
                reason: exp3_reason,
            }),
            _ => Ok(()),
        },
    }
}

fn trace(
    mode: RunMode,
    horizon: usize,
    seed: u64,
    slots: Vec<SlotTrace>,
    tape: &RewardTape,
) -> RunTrace {
    let k = slots[0].counts.len();
    let combined_counts = (0..k)
        .map(|arm| slots.iter().map(|s| s.counts[arm]).sum())
        .collect();
    RunTrace {
        mode,
        horizon,
        seed,
        slots,
        combined_counts,
        tape_consumed: (0..k).map(|arm| tape.consumed(arm)).collect(),
    }
}

/// Single algorithm on its own history; `|H_t| = t - 1`.
#[allow(clippy::too_many_arguments)]
pub fn individual_with<P: Policy + ?Sized>(
    policy: &mut P,
    spec: PolicySpec,
    tape: &mut RewardTape,
    rng: &mut ChaCha8Rng,
    horizon: usize,
    seed: u64,
    opts: RunOptions,
) -> RunTrace {
    let k = tape.cursors().len();
    let mut history = SharedHistory::new(k);
    let mut slot = SlotTrace::new(spec, k, horizon, opts);
    for _ in 0..horizon {
        let d = policy.select(&history, rng);
        let y = tape.draw(d.arm);
        policy.observe(&d, y);
        history.record(d.arm, y);
        slot.push(&d, y, opts);
    }
    trace(RunMode::Individual, horizon, seed, vec![slot], tape)
}

/// Two algorithms sharing one history; `|H_t| = 2 (t - 1)`.
#[allow(clippy::too_many_arguments)]
pub fn joint_with<P1: Policy + ?Sized, P2: Policy + ?Sized>(
    policy1: &mut P1,
    policy2: &mut P2,
    specs: (PolicySpec, PolicySpec),
    tape: &mut RewardTape,
    rngs: (&mut ChaCha8Rng, &mut ChaCha8Rng),
    horizon: usize,
    seed: u64,
    opts: RunOptions,
) -> RunTrace {
    let k = tape.cursors().len();
    let mut history = SharedHistory::new(k);
    let mut slot1 = SlotTrace::new(specs.0, k, horizon, opts);
    let mut slot2 = SlotTrace::new(specs.1, k, horizon, opts);
    for _ in 0..horizon {
        let d1 = policy1.select(&history, rngs.0);
        let d2 = policy2.select(&history, rngs.1);
        let y1 = tape.draw(d1.arm);
        let y2 = tape.draw(d2.arm);
        policy1.observe(&d1, y1);
        policy2.observe(&d2, y2);
        history.record(d1.arm, y1);
        history.record(d2.arm, y2);
        slot1.push(&d1, y1, opts);
        slot2.push(&d2, y2, opts);
    }
    trace(RunMode::Joint, horizon, seed, vec![slot1, slot2], tape)
}

/// The source sees only its own pulls; the sink sees both.
///
/// The source reads its arm tapes left to right exactly as in an individual
/// run, while the sink reads the same tapes from the right end, so the
/// source's trajectory does not depend on the sink at all.
#[allow(clippy::too_many_arguments)]
pub fn one_way_with<P1: Policy + ?Sized, P2: Policy + ?Sized>(
    source: &mut P1,
    sink: &mut P2,
    specs: (PolicySpec, PolicySpec),
    tape: &mut RewardTape,
    rngs: (&mut ChaCha8Rng, &mut ChaCha8Rng),
    horizon: usize,
    seed: u64,
    opts: RunOptions,
) -> RunTrace {
    let k = tape.cursors().len();
    let mut own = SharedHistory::new(k);
    let mut union = SharedHistory::new(k);
    let mut slot1 = SlotTrace::new(specs.0, k, horizon, opts);
    let mut slot2 = SlotTrace::new(specs.1, k, horizon, opts);
    for _ in 0..horizon {
        let d1 = source.select(&own, rngs.0);
        let d2 = sink.select(&union, rngs.1);
        let y1 = tape.draw(d1.arm);
        let y2 = tape.draw_from_end(d2.arm);
        source.observe(&d1, y1);
        sink.observe(&d2, y2);
        own.record(d1.arm, y1);
        union.record(d1.arm, y1);
        union.record(d2.arm, y2);
        slot1.push(&d1, y1, opts);
        slot2.push(&d2, y2, opts);
    }
    trace(RunMode::OneWay, horizon, seed, vec![slot1, slot2], tape)
}

fn individual_streams(
    spec: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
    tape_stream: Stream,
    alg_stream: Stream,
    opts: RunOptions,
) -> Result<RunTrace> {
    let mut policy = spec.build(instance.num_arms())?;
    let mut tape = RewardTape::sample_stream(instance, horizon, seed, tape_stream);
    let mut rng = stream_rng(seed, alg_stream);
    Ok(individual_with(
        &mut policy,
        *spec,
        &mut tape,
        &mut rng,
        horizon,
        seed,
        opts,
    ))
}

pub fn run_individual(
    spec: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
) -> Result<RunTrace> {
    run_individual_opts(spec, instance, horizon, seed, RunOptions::default())
}

pub fn run_individual_opts(
    spec: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<RunTrace> {
    check_horizon(horizon)?;
    validate_mode(RunMode::Individual, spec, None, instance)?;
    individual_streams(
        spec,
        instance,
        horizon,
        seed,
        Stream::Tape,
        Stream::Algorithm1,
        opts,
    )
}

/// Two separate individual runs under one replication seed.
pub fn run_individual_pair(
    spec1: &PolicySpec,
    spec2: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
    pairing: TapePairing,
    opts: RunOptions,
) -> Result<(RunTrace, RunTrace)> {
    check_horizon(horizon)?;
    validate_mode(RunMode::Individual, spec1, Some(spec2), instance)?;
    let first = individual_streams(
        spec1,
        instance,
        horizon,
        seed,
        Stream::Tape,
        Stream::Algorithm1,
        opts,
    )?;
    let second_tape = match pairing {
        TapePairing::Shared => Stream::Tape,
        TapePairing::Independent => Stream::IndependentTape,
    };
    let second = individual_streams(
        spec2,
        instance,
        horizon,
        seed,
        second_tape,
        Stream::Algorithm2,
        opts,
    )?;
    Ok((first, second))
}

pub fn run_joint(
    spec1: &PolicySpec,
    spec2: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
) -> Result<RunTrace> {
    run_joint_opts(spec1, spec2, instance, horizon, seed, RunOptions::default())
}

pub fn run_joint_opts(
    spec1: &PolicySpec,
    spec2: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<RunTrace> {
    check_horizon(horizon)?;
    validate_mode(RunMode::Joint, spec1, Some(spec2), instance)?;
    let k = instance.num_arms();
    let mut p1 = spec1.build(k)?;
    let mut p2 = spec2.build(k)?;
    let mut tape = RewardTape::sample(instance, horizon, seed);
    let mut r1 = stream_rng(seed, Stream::Algorithm1);
    let mut r2 = stream_rng(seed, Stream::Algorithm2);
    Ok(joint_with(
        &mut p1,
        &mut p2,
        (*spec1, *spec2),
        &mut tape,
        (&mut r1, &mut r2),
        horizon,
        seed,
        opts,
    ))
}

pub fn run_one_way(
    source: &PolicySpec,
    sink: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
) -> Result<RunTrace> {
    run_one_way_opts(source, sink, instance, horizon, seed, RunOptions::default())
}

pub fn run_one_way_opts(
    source: &PolicySpec,
    sink: &PolicySpec,
    instance: &BanditInstance,
    horizon: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<RunTrace> {
    check_horizon(horizon)?;
    validate_mode(RunMode::OneWay, source, Some(sink), instance)?;
    let k = instance.num_arms();
    let mut p1 = source.build(k)?;
    let mut p2 = sink.build(k)?;
    let mut tape = RewardTape::sample(instance, horizon, seed);
    let mut r1 = stream_rng(seed, Stream::Algorithm1);
    let mut r2 = stream_rng(seed, Stream::Algorithm2);
    Ok(one_way_with(
        &mut p1,
        &mut p2,
        (*source, *sink),
        &mut tape,
        (&mut r1, &mut r2),
        horizon,
        seed,
        opts,
    ))
}

/// Runs `f(replication_seed)` for every replication in parallel and returns
/// the results ordered by replication index.
pub fn replicate<T, F>(reps: usize, master_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map(|i| f(replication_seed(master_seed, i)))
        .collect()
}
