//! Grid and sweep helpers shared by presets and config runs.

use banditshare::metrics::{
    mean_pseudo_regret, mean_regret, pair_summaries, paired_difference, prob_correct_comparison,
    regret_curves, PairMode, Slot,
};
use banditshare::ratefit::{classify_growth, RatePoint, Thresholds};
use banditshare::{BanditInstance, GrowthClassification, PolicySpec, RateCurve, ReplicationSummary};

use crate::csv::{ClassificationRow, CurveRow, HeatmapRow};

/// Default grid of exploration exponents and prior skews.
pub const ALPHA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const GAMMA_GRID: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
pub const RATE_GRID: [usize; 5] = [250, 500, 1000, 2000, 4000];

/// One-parameter policy family swept by the heatmap presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Epsilon-greedy with a fixed `C`, indexed by `alpha`.
    EGreedy { c: f64 },
    /// UCB indexed by `alpha`.
    Ucb,
    /// Thompson sampling with prior size `m`, indexed by `gamma`.
    Thompson { m: f64 },
}

impl Family {
    pub fn spec(self, param: f64) -> PolicySpec {
        match self {
            Family::EGreedy { c } => PolicySpec::EGreedy { alpha: param, c },
            Family::Ucb => PolicySpec::Ucb { alpha: param },
            Family::Thompson { m } => PolicySpec::Thompson {
                prior_size: m,
                prior_skew: param,
            },
        }
    }

    pub fn param_name(self) -> &'static str {
        match self {
            Family::Thompson { .. } => "gamma",
            _ => "alpha",
        }
    }

    pub fn describe(self) -> String {
        match self {
            Family::EGreedy { c } => format!("egreedy(C={c})"),
            Family::Ucb => "ucb".into(),
            Family::Thompson { m } => format!("thompson(m={m})"),
        }
    }
}

/// One heatmap cell with the replications behind it.
#[derive(Debug, Clone)]
pub struct Cell {
    pub param1: f64,
    pub param2: f64,
    pub summaries: Vec<ReplicationSummary>,
}

impl Cell {
    /// `R(A1) - R(A2)` and, taking the smaller parameter as the better
    /// algorithm (slot 1 on the diagonal), the share of replications that
    /// rank the two correctly.
    pub fn row(&self) -> banditshare::Result<HeatmapRow> {
        let diff = paired_difference(&self.summaries, "mean_diff")?;
        let better = if self.param2 < self.param1 {
            Slot::Second
        } else {
            Slot::First
        };
        let prob = prob_correct_comparison(&self.summaries, better)?;
        Ok(HeatmapRow {
            param1: self.param1,
            param2: self.param2,
            mean_diff: diff.mean,
            se: diff.se,
            prob_correct: prob.mean,
            prob_se: prob.se,
            reps: self.summaries.len(),
        })
    }
}

/// Every ordered pair of the grid, row-major in `param1`.
pub fn heatmap(
    family: Family,
    grid: &[f64],
    mode: PairMode,
    instance: &BanditInstance,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> banditshare::Result<Vec<Cell>> {
    let mut cells = Vec::with_capacity(grid.len() * grid.len());
    for &p1 in grid {
        for &p2 in grid {
            let summaries = pair_summaries(
                mode,
                &family.spec(p1),
                &family.spec(p2),
                instance,
                horizon,
                reps,
                seed,
            )?;
            cells.push(Cell {
                param1: p1,
                param2: p2,
                summaries,
            });
        }
    }
    Ok(cells)
}

/// Curve rows for cumulative regret after every timestep.
#[allow(clippy::too_many_arguments)]
pub fn curve_rows(
    experiment_id: &str,
    mode: PairMode,
    spec1: &PolicySpec,
    spec2: Option<&PolicySpec>,
    instance: &BanditInstance,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> banditshare::Result<Vec<CurveRow>> {
    let curves = regret_curves(mode, spec1, spec2, instance, horizon, reps, seed)?;
    let mut rows = Vec::new();
    for c in &curves {
        for t in 0..horizon {
            rows.push(CurveRow {
                experiment_id: experiment_id.to_string(),
                mode: mode.run_mode().as_str().to_string(),
                algo_slot: c.slot + 1,
                spec: c.spec,
                t: t + 1,
                mean_regret: c.mean[t],
                se: c.se[t],
                reps: c.reps,
            });
        }
    }
    Ok(rows)
}

/// Mean regret of each slot at each horizon of a sweep.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub mode: PairMode,
    pub specs: Vec<PolicySpec>,
    pub horizons: Vec<usize>,
    /// `realized[slot][i]` and `pseudo[slot][i]` at `horizons[i]`.
    pub realized: Vec<Vec<banditshare::MonteCarloEstimate>>,
    pub pseudo: Vec<Vec<banditshare::MonteCarloEstimate>>,
}

/// Runs a horizon sweep; `spec2 = None` sweeps one algorithm alone.
pub fn sweep(
    mode: PairMode,
    spec1: &PolicySpec,
    spec2: Option<&PolicySpec>,
    instance: &BanditInstance,
    horizons: &[usize],
    reps: usize,
    seed: u64,
) -> banditshare::Result<Sweep> {
    let specs: Vec<PolicySpec> = std::iter::once(*spec1).chain(spec2.copied()).collect();
    let mut realized = vec![Vec::new(); specs.len()];
    let mut pseudo = vec![Vec::new(); specs.len()];
    for &t in horizons {
        let summaries = match spec2 {
            Some(s2) => pair_summaries(mode, spec1, s2, instance, t, reps, seed)?,
            None => banditshare::metrics::individual_summaries(spec1, instance, t, reps, seed)?,
        };
        for slot in 0..specs.len() {
            realized[slot].push(mean_regret(&summaries, slot)?);
            pseudo[slot].push(mean_pseudo_regret(&summaries, slot)?);
        }
    }
    Ok(Sweep {
        mode,
        specs,
        horizons: horizons.to_vec(),
        realized,
        pseudo,
    })
}

impl Sweep {
    /// Rate curve of one slot, built from pseudo-regret (same expectation as
    /// realized regret, without the reward noise).
    pub fn rate_curve(&self, slot: usize, label: &str) -> banditshare::Result<RateCurve> {
        let points = self
            .horizons
            .iter()
            .zip(&self.pseudo[slot])
            .map(|(&t, e)| RatePoint {
                horizon: t as u64,
                mean: e.mean,
                se: e.se,
            })
            .collect();
        RateCurve::new(points, label, self.mode.run_mode().as_str())
    }

    pub fn classify(&self, slot: usize, th: &Thresholds) -> banditshare::Result<GrowthClassification> {
        classify_growth(&self.rate_curve(slot, "")?, th)
    }

    pub fn curve_rows(&self, experiment_id: &str) -> Vec<CurveRow> {
        let mut rows = Vec::new();
        for (slot, spec) in self.specs.iter().enumerate() {
            for (i, &t) in self.horizons.iter().enumerate() {
                let e = &self.pseudo[slot][i];
                rows.push(CurveRow {
                    experiment_id: experiment_id.to_string(),
                    mode: self.mode.run_mode().as_str().to_string(),
                    algo_slot: slot + 1,
                    spec: *spec,
                    t,
                    mean_regret: e.mean,
                    se: e.se,
                    reps: e.reps,
                });
            }
        }
        rows
    }

    pub fn classification_rows(
        &self,
        experiment_id: &str,
        th: &Thresholds,
    ) -> banditshare::Result<Vec<ClassificationRow>> {
        (0..self.specs.len())
            .map(|slot| {
                let g = self.classify(slot, th)?;
                Ok(ClassificationRow {
                    pair: format!("{experiment_id}[{}]", slot + 1),
                    mode: self.mode.run_mode().as_str().to_string(),
                    slope: g.slope,
                    slope_se: g.slope_se,
                    r2_log: g.r2_log,
                    label: g.label.to_string(),
                })
            })
            .collect()
    }
}
