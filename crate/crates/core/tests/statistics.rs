//! Monte Carlo estimates against closed-form oracles.

use banditshare::metrics::{
    individual_summaries, mean_pseudo_regret, mean_regret, optimal_pull_tail, pair_summaries,
    PairMode,
};
use banditshare::{BanditInstance, DistributionKind, MonteCarloEstimate, PolicySpec};

fn two_arm() -> BanditInstance {
    BanditInstance::new(&[0.8, 0.2], DistributionKind::Bernoulli).unwrap()
}

fn within(e: &MonteCarloEstimate, exact: f64, z: f64) -> bool {
    (e.mean - exact).abs() <= z * e.se
}

/// With `C` large enough that every step explores, pulls after the forced
/// prefix are uniform: expected regret is `gap * (1 + (T - K) / 2)` for two
/// arms whose forced pull of arm 2 costs one gap.
#[test]
fn uniform_exploration_regret() {
    let inst = two_arm();
    let spec = PolicySpec::EGreedy { alpha: 0.0, c: 1e6 };
    for kind in [DistributionKind::Bernoulli, DistributionKind::Beta { concentration: 3.0 }] {
        let inst = BanditInstance::new(inst.means(), kind).unwrap();
        let s = individual_summaries(&spec, &inst, 40, 20_000, 3).unwrap();
        let exact = 0.6 * (1.0 + 38.0 / 2.0);
        assert!(within(&mean_regret(&s, 0).unwrap(), exact, 4.0));
        assert!(within(&mean_pseudo_regret(&s, 0).unwrap(), exact, 4.0));
    }
}

#[test]
fn realized_and_pseudo_regret_agree() {
    let inst = BanditInstance::new(&[0.2, 0.5, 0.45], DistributionKind::Beta { concentration: 2.0 }).unwrap();
    let s = pair_summaries(
        PairMode::Joint,
        &PolicySpec::Ucb { alpha: 0.25 },
        &PolicySpec::Greedy,
        &inst,
        80,
        20_000,
        11,
    )
    .unwrap();
    for slot in 0..2 {
        let (r, p) = (mean_regret(&s, slot).unwrap(), mean_pseudo_regret(&s, slot).unwrap());
        assert!((r.mean - p.mean).abs() <= 4.0 * (r.se.powi(2) + p.se.powi(2)).sqrt());
    }
}

#[test]
fn standard_error_shrinks_like_root_n() {
    let inst = two_arm();
    let spec = PolicySpec::EGreedy { alpha: 1.0, c: 1.0 };
    let small = mean_regret(&individual_summaries(&spec, &inst, 50, 2_000, 5).unwrap(), 0).unwrap();
    let large = mean_regret(&individual_summaries(&spec, &inst, 50, 32_000, 5).unwrap(), 0).unwrap();
    let ratio = small.se / large.se;
    assert!((3.4..4.6).contains(&ratio), "ratio {ratio}");
}

fn binomial_cdf(n: u64, k: u64) -> f64 {
    let mut term = 0.5f64.powi(n as i32);
    let mut total = term;
    for j in 1..=k.min(n) {
        term *= (n - j + 1) as f64 / j as f64;
        total += term;
    }
    total
}

/// A uniform partner pulls the best arm once in its forced prefix and then
/// `Binomial(T - 2, 1/2)` more times.
#[test]
fn optimal_pull_tail_of_uniform_policy() {
    let inst = two_arm();
    let spec = PolicySpec::EGreedy { alpha: 0.0, c: 1e6 };
    let tail = optimal_pull_tail(&spec, &inst, 100, 20_000, 8).unwrap();
    let k = tail.threshold.floor() as u64;
    let exact = binomial_cdf(98, k - 1);
    assert!(within(&tail.estimate, exact, 4.0), "{:?} vs {exact}", tail.estimate);
}

#[test]
fn individual_regret_increases_with_exploration() {
    let inst = two_arm();
    for family in [
        |a| PolicySpec::EGreedy { alpha: a, c: 1.0 },
        |a| PolicySpec::Ucb { alpha: a },
    ] {
        let means: Vec<MonteCarloEstimate> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&a| mean_regret(&individual_summaries(&family(a), &inst, 100, 4_000, 21).unwrap(), 0).unwrap())
            .collect();
        for w in means.windows(2) {
            assert!(w[1].mean - w[0].mean > 3.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt());
        }
    }
}
