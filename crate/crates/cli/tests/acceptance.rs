//! End-to-end acceptance checks on the two-arm Bernoulli(0.8, 0.2) instance.
//!
//! Each test prints one `PASS`/`FAIL` line (with the failing sub-checks) and
//! then asserts. Tolerances are fixed: 3 standard errors for Monte Carlo
//! comparisons, the default growth-classifier bands for rate checks.

use std::sync::OnceLock;

use banditshare::metrics::{
    dm_estimate, gte_reference, individual_summaries, mean_pseudo_regret, mean_regret,
    optimal_pull_tail, pair_summaries, prob_correct_comparison, sign_verdict, HorizonConvention,
    PairMode, Slot,
};
use banditshare::ratefit::{GrowthClassification, GrowthLabel, Thresholds};
use banditshare::{
    BanditInstance, DistributionKind, MonteCarloEstimate, PolicySpec, ReplicationSummary,
    TapePairing, Verdict,
};
use banditshare_cli::experiments::{heatmap, sweep, Cell, Family, Sweep, ALPHA_GRID, RATE_GRID};
use banditshare_cli::{run_preset, PresetOptions};

const T: usize = 100;
const REPS: usize = 10_000;
const SWEEP_REPS: usize = 1_000;
const Z: f64 = 3.0;
const SEED: u64 = 0x5eed_2024;

const GREEDY: PolicySpec = PolicySpec::Greedy;
const EGRD0: PolicySpec = PolicySpec::EGreedy { alpha: 0.0, c: 1.0 };
const UCB0: PolicySpec = PolicySpec::Ucb { alpha: 0.0 };

fn instance() -> BanditInstance {
    BanditInstance::new(&[0.8, 0.2], DistributionKind::Bernoulli).unwrap()
}

/// Collects named sub-checks and reports them as one line.
struct Criterion {
    number: u32,
    title: &'static str,
    failures: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn new(number: u32, title: &'static str) -> Self {
        Self {
            number,
            title,
            failures: Vec::new(),
            checks: 0,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!(
                "PASS criterion {}: {} ({} checks)",
                self.number, self.title, self.checks
            );
        } else {
            println!(
                "FAIL criterion {}: {} ({}/{} checks failed): {}",
                self.number,
                self.title,
                self.failures.len(),
                self.checks,
                self.failures.join("; ")
            );
            panic!("criterion {} failed", self.number);
        }
    }
}

/// `a` below `b` by at least `Z` combined standard errors.
fn below(a: &MonteCarloEstimate, b: &MonteCarloEstimate) -> (bool, f64) {
    let z = (b.mean - a.mean) / (a.se.powi(2) + b.se.powi(2)).sqrt();
    (z >= Z, z)
}

fn fmt(e: &MonteCarloEstimate) -> String {
    format!("{:.4}±{:.4}", e.mean, e.se)
}

/// Realized vs pseudo-regret means of every slot agree within `Z` combined SE.
fn realized_matches_pseudo(summaries: &[ReplicationSummary]) -> Vec<String> {
    let mut bad = Vec::new();
    for slot in 0..summaries[0].slots.len() {
        let r = mean_regret(summaries, slot).unwrap();
        let p = mean_pseudo_regret(summaries, slot).unwrap();
        let z = (r.mean - p.mean).abs() / (r.se.powi(2) + p.se.powi(2)).sqrt();
        if z.is_nan() || z >= Z {
            bad.push(format!("slot {}: realized {} vs pseudo {}", slot + 1, fmt(&r), fmt(&p)));
        }
    }
    bad
}

// Shared Monte Carlo data; criterion 9 re-examines everything generated for
// the other criteria.

struct SignViolationData {
    individual: Vec<(PolicySpec, Vec<ReplicationSummary>)>,
    joint: Vec<(PolicySpec, Vec<ReplicationSummary>)>,
}

fn sign_violation_data() -> &'static SignViolationData {
    static DATA: OnceLock<SignViolationData> = OnceLock::new();
    DATA.get_or_init(|| {
        let inst = instance();
        let mut individual = Vec::new();
        let mut joint = Vec::new();
        for partner in [EGRD0, UCB0] {
            let ind = PairMode::Individual(TapePairing::Shared);
            individual.push((partner, pair_summaries(ind, &GREEDY, &partner, &inst, T, REPS, SEED).unwrap()));
            joint.push((partner, pair_summaries(PairMode::Joint, &GREEDY, &partner, &inst, T, REPS, SEED).unwrap()));
        }
        SignViolationData { individual, joint }
    })
}

struct Sweeps {
    greedy: Sweep,
    greedy_ucb0: Sweep,
    greedy_egrd0: Sweep,
    /// (spec, individual sweep) for the power-rate checks.
    power: Vec<(PolicySpec, Sweep)>,
    exp3_greedy: Sweep,
}

fn sweeps() -> &'static Sweeps {
    static DATA: OnceLock<Sweeps> = OnceLock::new();
    DATA.get_or_init(|| {
        let inst = instance();
        let ind = PairMode::Individual(TapePairing::Shared);
        let run = |mode, s1: &PolicySpec, s2: Option<&PolicySpec>| {
            sweep(mode, s1, s2, &inst, &RATE_GRID, SWEEP_REPS, SEED).unwrap()
        };
        let power = [0.0, 0.5, 1.0]
            .into_iter()
            .flat_map(|alpha| {
                [
                    PolicySpec::EGreedy { alpha, c: 1.0 },
                    PolicySpec::Ucb { alpha },
                ]
            })
            .map(|spec| (spec, run(ind, &spec, None)))
            .collect();
        Sweeps {
            greedy: run(ind, &GREEDY, None),
            greedy_ucb0: run(PairMode::Joint, &GREEDY, Some(&UCB0)),
            greedy_egrd0: run(PairMode::Joint, &GREEDY, Some(&EGRD0)),
            power,
            exp3_greedy: run(PairMode::OneWay, &PolicySpec::Exp3, Some(&GREEDY)),
        }
    })
}

struct Grids {
    /// (family, joint cells, individual cells on independent tapes)
    families: Vec<(Family, Vec<Cell>, Vec<Cell>)>,
}

fn grids() -> &'static Grids {
    static DATA: OnceLock<Grids> = OnceLock::new();
    DATA.get_or_init(|| {
        let inst = instance();
        let families = [Family::EGreedy { c: 1.0 }, Family::Ucb]
            .into_iter()
            .map(|f| {
                let joint = heatmap(f, &ALPHA_GRID, PairMode::Joint, &inst, T, REPS, SEED).unwrap();
                let ind = PairMode::Individual(TapePairing::Independent);
                let individual = heatmap(f, &ALPHA_GRID, ind, &inst, T, REPS, SEED).unwrap();
                (f, joint, individual)
            })
            .collect();
        Grids { families }
    })
}

struct ThompsonData {
    /// ((gamma_low, gamma_high), individual, joint)
    pairs: Vec<((f64, f64), Vec<ReplicationSummary>, Vec<ReplicationSummary>)>,
}

fn thompson_data() -> &'static ThompsonData {
    static DATA: OnceLock<ThompsonData> = OnceLock::new();
    DATA.get_or_init(|| {
        let inst = instance();
        let ts = |g| PolicySpec::Thompson {
            prior_size: 5.0,
            prior_skew: g,
        };
        let pairs = [(0.1, 0.9), (0.25, 0.75)]
            .into_iter()
            .map(|(lo, hi)| {
                let ind = PairMode::Individual(TapePairing::Independent);
                let individual = pair_summaries(ind, &ts(lo), &ts(hi), &inst, T, REPS, SEED).unwrap();
                let joint = pair_summaries(PairMode::Joint, &ts(lo), &ts(hi), &inst, T, REPS, SEED).unwrap();
                ((lo, hi), individual, joint)
            })
            .collect();
        ThompsonData { pairs }
    })
}

#[test]
fn criterion_1_sign_violation() {
    let mut c = Criterion::new(1, "greedy loses individually, wins jointly; sign violated");
    let inst = instance();
    let data = sign_violation_data();
    for (partner, s) in &data.individual {
        let (g, p) = (mean_regret(s, 0).unwrap(), mean_regret(s, 1).unwrap());
        let (ok, z) = below(&p, &g);
        c.check(ok, || {
            format!("individual R(greedy) {} vs R({partner}) {} (z = {z:.2})", fmt(&g), fmt(&p))
        });
    }
    for (partner, s) in &data.joint {
        let (g, p) = (mean_regret(s, 0).unwrap(), mean_regret(s, 1).unwrap());
        let (ok, z) = below(&g, &p);
        c.check(ok, || {
            format!("joint R(greedy) {} vs R({partner}) {} (z = {z:.2})", fmt(&g), fmt(&p))
        });
        let gte = gte_reference(&GREEDY, partner, &inst, T, HorizonConvention::Doubled, REPS, SEED).unwrap();
        let v = sign_verdict(&gte, &dm_estimate(s).unwrap(), Z);
        c.check(v.verdict == Verdict::Violated, || {
            format!(
                "greedy vs {partner}: verdict {} (gte {}, z_dm {:.2})",
                v.verdict.as_str(),
                fmt(&gte),
                v.z_dm
            )
        });
    }
    c.finish();
}

fn expect_label(c: &mut Criterion, what: &str, g: &GrowthClassification, want: GrowthLabel) {
    c.check(g.label == want, || {
        format!("{what}: slope {:.3}, R2 {:.3} -> {} (want {want})", g.slope, g.r2_log, g.label)
    });
}

#[test]
fn criterion_2_constant_vs_linear() {
    let mut c = Criterion::new(2, "greedy linear alone, constant with UCB0 or egreedy0 partner");
    let th = Thresholds::default();
    let s = sweeps();
    expect_label(&mut c, "greedy individual", &s.greedy.classify(0, &th).unwrap(), GrowthLabel::Linear);
    expect_label(&mut c, "greedy | ucb0", &s.greedy_ucb0.classify(0, &th).unwrap(), GrowthLabel::Constant);
    expect_label(&mut c, "greedy | egreedy0", &s.greedy_egrd0.classify(0, &th).unwrap(), GrowthLabel::Constant);
    c.finish();
}

#[test]
fn criterion_3_power_rates() {
    let mut c = Criterion::new(3, "individual power rates of egreedy and UCB");
    let th = Thresholds::default();
    for (spec, sw) in &sweeps().power {
        let g = sw.classify(0, &th).unwrap();
        let alpha = spec.alpha().unwrap();
        if alpha == 0.0 {
            c.check(g.slope < 0.25 && g.r2_log >= 0.98, || {
                format!("{spec}: slope {:.3} (want < 0.25), R2 {:.4} (want >= 0.98)", g.slope, g.r2_log)
            });
        } else {
            c.check((g.slope - alpha).abs() <= 0.15, || {
                format!("{spec}: slope {:.3} (want {alpha} ± 0.15)", g.slope)
            });
        }
    }
    c.finish();
}

#[test]
fn criterion_4_sign_preservation() {
    let mut c = Criterion::new(4, "lower exploration wins jointly; sign preserved");
    let inst = instance();
    for (family, joint, _) in &grids().families {
        for cell in joint {
            if cell.param2 < cell.param1 + 0.25 - 1e-12 {
                continue;
            }
            let r1 = mean_regret(&cell.summaries, 0).unwrap();
            let r2 = mean_regret(&cell.summaries, 1).unwrap();
            let (ok, z) = below(&r1, &r2);
            let name = family.describe();
            c.check(ok, || {
                format!("{name} ({}, {}): {} vs {} (z = {z:.2})", cell.param1, cell.param2, fmt(&r1), fmt(&r2))
            });
            let (s1, s2) = (family.spec(cell.param1), family.spec(cell.param2));
            let gte = gte_reference(&s1, &s2, &inst, T, HorizonConvention::Doubled, REPS, SEED).unwrap();
            let v = sign_verdict(&gte, &dm_estimate(&cell.summaries).unwrap(), Z);
            c.check(v.verdict == Verdict::Preserved, || {
                format!("{name} ({}, {}): verdict {}", cell.param1, cell.param2, v.verdict.as_str())
            });
        }
    }
    c.finish();
}

#[test]
fn criterion_5_stochastic_comparison() {
    let mut c = Criterion::new(5, "probability of correct comparison above 1/2");
    for (family, joint, individual) in &grids().families {
        for (mode, cells) in [("joint", joint), ("individual", individual)] {
            for cell in cells {
                if (cell.param1 - cell.param2).abs() < 0.5 - 1e-12 {
                    continue;
                }
                let row = cell.row().unwrap();
                c.check(row.prob_correct - 0.5 > Z * row.prob_se, || {
                    format!(
                        "{} {mode} ({}, {}): {:.4}±{:.4}",
                        family.describe(),
                        cell.param1,
                        cell.param2,
                        row.prob_correct,
                        row.prob_se
                    )
                });
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_6_thompson_priors() {
    let mut c = Criterion::new(6, "Thompson sampling with the less skewed prior wins");
    for ((lo, hi), individual, joint) in &thompson_data().pairs {
        for (mode, s) in [("individual", individual), ("joint", joint)] {
            let (r_lo, r_hi) = (mean_regret(s, 0).unwrap(), mean_regret(s, 1).unwrap());
            let (ok, z) = below(&r_lo, &r_hi);
            c.check(ok, || {
                format!("{mode} gamma {lo} vs {hi}: {} vs {} (z = {z:.2})", fmt(&r_lo), fmt(&r_hi))
            });
            let p = prob_correct_comparison(s, Slot::First).unwrap();
            c.check(p.mean - 0.5 > Z * p.se, || {
                format!("{mode} gamma {lo} vs {hi}: prob_correct {}", fmt(&p))
            });
        }
    }
    c.finish();
}

#[test]
fn criterion_7_exp3_one_way() {
    let mut c = Criterion::new(7, "greedy sink of EXP3 is constant; EXP3 grows like T^(2/3)");
    let th = Thresholds::default();
    let s = &sweeps().exp3_greedy;
    let sink = s.classify(1, &th).unwrap();
    expect_label(&mut c, "greedy sink", &sink, GrowthLabel::Constant);
    let src = s.classify(0, &th).unwrap();
    c.check((0.55..=0.85).contains(&src.slope), || {
        format!("exp3 source slope {:.3} (want [0.55, 0.85])", src.slope)
    });
    c.finish();
}

/// Exhaustive greedy on every 0/1 tape with `2T` cells per arm. Returns the
/// probability-weighted mean realized regret of the first algorithm for
/// individual and two-greedy joint runs.
fn brute_force_greedy(means: [f64; 2], horizon: usize) -> (f64, f64) {
    let cells = 2 * horizon;
    let best = means[0].max(means[1]);
    let (mut individual, mut joint) = (0.0, 0.0);
    for bits in 0u32..(1 << (2 * cells)) {
        let tape = |arm: usize, i: usize| ((bits >> (arm * cells + i)) & 1) as f64;
        let mut prob = 1.0;
        for arm in 0..2 {
            for i in 0..cells {
                prob *= if tape(arm, i) == 1.0 { means[arm] } else { 1.0 - means[arm] };
            }
        }
        for (players, acc) in [(1usize, &mut individual), (2, &mut joint)] {
            let (mut n, mut sum, mut cursor) = ([0usize; 2], [0.0f64; 2], [0usize; 2]);
            let mut first_reward = 0.0;
            for _ in 0..horizon {
                let arm = if n[0] == 0 {
                    0
                } else if n[1] == 0 {
                    1
                } else if sum[1] / n[1] as f64 > sum[0] / n[0] as f64 {
                    1
                } else {
                    0
                };
                for p in 0..players {
                    let y = tape(arm, cursor[arm]);
                    cursor[arm] += 1;
                    if p == 0 {
                        first_reward += y;
                    }
                    n[arm] += 1;
                    sum[arm] += y;
                }
            }
            *acc += prob * (horizon as f64 * best - first_reward);
        }
    }
    (individual, joint)
}

#[test]
fn criterion_8_brute_force_oracle() {
    let mut c = Criterion::new(8, "Monte Carlo matches exhaustive enumeration at T = 3");
    let inst = instance();
    let (exact_ind, exact_joint) = brute_force_greedy([0.8, 0.2], 3);
    let reps = 100_000;
    let ind = mean_regret(&individual_summaries(&GREEDY, &inst, 3, reps, SEED).unwrap(), 0).unwrap();
    let joint_s = pair_summaries(PairMode::Joint, &GREEDY, &GREEDY, &inst, 3, reps, SEED).unwrap();
    for (what, exact, mc) in [
        ("greedy individual", exact_ind, ind),
        ("greedy+greedy joint, slot 1", exact_joint, mean_regret(&joint_s, 0).unwrap()),
        ("greedy+greedy joint, slot 2", exact_joint, mean_regret(&joint_s, 1).unwrap()),
    ] {
        c.check((mc.mean - exact).abs() <= Z * mc.se, || {
            format!("{what}: Monte Carlo {} vs exact {exact:.6}", fmt(&mc))
        });
    }
    c.finish();
}

#[test]
fn criterion_9_estimator_identities() {
    let mut c = Criterion::new(9, "realized vs pseudo-regret, DM pairing, uniform calibration");
    let inst = instance();

    let sv = sign_violation_data();
    let mut all: Vec<(String, &[ReplicationSummary])> = Vec::new();
    for (partner, s) in &sv.individual {
        all.push((format!("greedy vs {partner} individual"), s));
    }
    for (partner, s) in &sv.joint {
        all.push((format!("greedy vs {partner} joint"), s));
    }
    for (family, joint, individual) in &grids().families {
        for (mode, cells) in [("joint", joint), ("individual", individual)] {
            for cell in cells {
                let what = format!("{} {mode} ({}, {})", family.describe(), cell.param1, cell.param2);
                all.push((what, &cell.summaries));
            }
        }
    }
    for ((lo, hi), individual, joint) in &thompson_data().pairs {
        all.push((format!("thompson {lo} vs {hi} individual"), individual));
        all.push((format!("thompson {lo} vs {hi} joint"), joint));
    }
    for (what, s) in &all {
        let bad = realized_matches_pseudo(s);
        c.check(bad.is_empty(), || format!("{what}: {}", bad.join(", ")));
    }

    let sw = sweeps();
    let mut sweep_list: Vec<&Sweep> = vec![&sw.greedy, &sw.greedy_ucb0, &sw.greedy_egrd0, &sw.exp3_greedy];
    sweep_list.extend(sw.power.iter().map(|(_, s)| s));
    for s in sweep_list {
        for slot in 0..s.specs.len() {
            for (i, t) in s.horizons.iter().enumerate() {
                let (r, p) = (&s.realized[slot][i], &s.pseudo[slot][i]);
                let z = (r.mean - p.mean).abs() / (r.se.powi(2) + p.se.powi(2)).sqrt();
                c.check(z < Z, || {
                    format!("{} T={t}: realized {} vs pseudo {}", s.specs[slot], fmt(r), fmt(p))
                });
            }
        }
    }

    for (_, s) in &sv.joint {
        let dm = dm_estimate(s).unwrap();
        let diff = mean_regret(s, 0).unwrap().mean - mean_regret(s, 1).unwrap().mean;
        c.check((dm.mean - diff).abs() <= 1e-9 * diff.abs().max(1.0), || {
            format!("dm {} != mean difference {diff}", dm.mean)
        });
    }

    let uniform = PolicySpec::EGreedy { alpha: 0.0, c: 200.0 };
    let u = mean_regret(&individual_summaries(&uniform, &inst, T, REPS, SEED).unwrap(), 0).unwrap();
    c.check((u.mean - 30.0).abs() <= Z * u.se, || {
        format!("uniform policy regret {} vs 30.0", fmt(&u))
    });
    c.finish();
}

fn binomial_cdf(n: u64, p: f64, k: u64) -> f64 {
    let mut term = (1.0 - p).powi(n as i32);
    let mut total = term;
    for j in 1..=k.min(n) {
        term *= (n - j + 1) as f64 / j as f64 * p / (1.0 - p);
        total += term;
    }
    total
}

#[test]
fn criterion_10_condition_checker() {
    let mut c = Criterion::new(10, "optimal-arm tail of UCB0 with greedy; uniform calibration");
    let inst = instance();
    let ucb = optimal_pull_tail(&UCB0, &inst, T, REPS, SEED).unwrap();
    c.check(ucb.estimate.mean < 0.05, || {
        format!("ucb0 tail {} (want < 0.05)", fmt(&ucb.estimate))
    });

    let uniform = PolicySpec::EGreedy { alpha: 0.0, c: 200.0 };
    let u = optimal_pull_tail(&uniform, &inst, T, REPS, SEED).unwrap();
    let exact = binomial_cdf(T as u64, 0.5, u.threshold.floor() as u64);
    c.check((u.estimate.mean - exact).abs() <= Z * u.estimate.se, || {
        format!(
            "uniform tail {} vs Binomial({T}, 1/2) CDF at {:.2} = {exact:.5}",
            fmt(&u.estimate),
            u.threshold
        )
    });
    c.finish();
}

#[test]
fn criterion_11_preset_determinism() {
    let mut c = Criterion::new(11, "fig2b preset is byte-identical across runs");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let files: Vec<Vec<std::path::PathBuf>> = dirs
        .iter()
        .map(|d| {
            let opts = PresetOptions {
                seed: 7,
                reps: None,
                out_dir: d.path().to_path_buf(),
            };
            run_preset("fig2b", &opts).unwrap()
        })
        .collect();
    c.check(files[0].len() == files[1].len() && !files[0].is_empty(), || {
        "different file sets".into()
    });
    for (a, b) in files[0].iter().zip(&files[1]) {
        let (x, y) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        c.check(x == y, || format!("{} differs", a.file_name().unwrap().to_string_lossy()));
    }
    c.finish();
}
