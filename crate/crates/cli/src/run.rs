//! Execution of `run`, `ratefit` and `check-condition12`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use banditshare::metrics::{
    dm_estimate, gte_reference, individual_summaries, mean_pseudo_regret, mean_regret,
    optimal_pull_tail, pair_summaries, prob_correct_comparison, sign_verdict, PairMode, Slot,
};
use banditshare::ratefit::{classify_growth, RatePoint, Thresholds};
use banditshare::runner::RunMode;
use banditshare::{RateCurve, TapePairing};

use crate::config::{ExperimentConfig, Metric};
use crate::csv::{
    emit_csv, fmt_g17, read_csv, ClassificationRow, CurveRow, CLASSIFICATION_HEADER, CURVE_HEADER,
    SUMMARY_HEADER, TAIL_HEADER,
};
use crate::experiments::{curve_rows, sweep};

/// Files written and human-readable lines for the terminal.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

fn pair_mode(mode: RunMode) -> PairMode {
    match mode {
        RunMode::Individual => PairMode::Individual(TapePairing::Shared),
        RunMode::Joint => PairMode::Joint,
        RunMode::OneWay => PairMode::OneWay,
    }
}

fn metadata(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let mut md = vec![
        ("experiment_id".to_string(), cfg.experiment_id.clone()),
        ("instance".to_string(), format!("{:?}{:?}", cfg.distribution, cfg.means)),
        ("mode".to_string(), cfg.mode.as_str().to_string()),
        ("spec1".to_string(), cfg.spec1.to_string()),
    ];
    if let Some(s2) = &cfg.spec2 {
        md.push(("spec2".to_string(), s2.to_string()));
    }
    md.push(("horizons".to_string(), format!("{:?}", cfg.horizons)));
    md.push(("seed".to_string(), cfg.seed.to_string()));
    md.push(("reps".to_string(), cfg.replications.to_string()));
    md
}

fn output_path(cfg: &ExperimentConfig, out_dir: &Path) -> PathBuf {
    match &cfg.output {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => out_dir.join(p),
        None => out_dir.join(format!("{}.csv", sanitize(&cfg.experiment_id))),
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

/// Runs a config. A horizon grid produces a rate sweep; a single horizon
/// produces one summary row per requested metric.
pub fn run_config(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Report> {
    if cfg.replications < 2 {
        bail!("replications must be at least 2 to report standard errors");
    }
    let path = output_path(cfg, out_dir);
    if cfg.is_sweep() {
        run_sweep(cfg, &path)
    } else {
        run_single(cfg, &path)
    }
}

fn run_sweep(cfg: &ExperimentConfig, path: &Path) -> Result<Report> {
    let inst = cfg.instance()?;
    let s = sweep(
        pair_mode(cfg.mode),
        &cfg.spec1,
        cfg.spec2.as_ref(),
        &inst,
        &cfg.horizons,
        cfg.replications,
        cfg.seed,
    )?;
    let mut md = metadata(cfg);
    md.push(("regret".into(), "pseudo".into()));
    let rows: Vec<_> = s.curve_rows(&cfg.experiment_id).iter().map(CurveRow::cells).collect();
    emit_csv(path, &md, &CURVE_HEADER, &rows)?;
    let mut report = Report {
        files: vec![path.to_path_buf()],
        lines: Vec::new(),
    };
    if cfg.horizons.len() >= banditshare::ratefit::MIN_POINTS {
        let class = s.classification_rows(&cfg.experiment_id, &cfg.thresholds)?;
        for (c, spec) in class.iter().zip(&s.specs) {
            report.lines.push(format!(
                "{} {spec}: slope {:.3} (se {:.3}), R2(log) {:.3} -> {}",
                c.pair, c.slope, c.slope_se, c.r2_log, c.label
            ));
        }
        let cpath = sibling(path, "ratefit");
        let rows: Vec<_> = class.iter().map(ClassificationRow::cells).collect();
        emit_csv(&cpath, &md, &CLASSIFICATION_HEADER, &rows)?;
        report.files.push(cpath);
    }
    Ok(report)
}

fn run_single(cfg: &ExperimentConfig, path: &Path) -> Result<Report> {
    let inst = cfg.instance()?;
    let t = cfg.horizons[0];
    let (reps, seed) = (cfg.replications, cfg.seed);
    let mode = pair_mode(cfg.mode);
    let summaries = match &cfg.spec2 {
        Some(s2) => pair_summaries(mode, &cfg.spec1, s2, &inst, t, reps, seed)?,
        None => individual_summaries(&cfg.spec1, &inst, t, reps, seed)?,
    };
    let slots = summaries[0].slots.len();
    let mut report = Report::default();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |metric: &str, slot: Option<usize>, value: f64, se: f64, label: &str| {
        rows.push(vec![
            cfg.experiment_id.clone(),
            cfg.mode.as_str().to_string(),
            metric.to_string(),
            slot.map(|s| (s + 1).to_string()).unwrap_or_default(),
            fmt_g17(value),
            fmt_g17(se),
            reps.to_string(),
            label.to_string(),
        ]);
    };
    let need_pair = |m: Metric| -> Result<&banditshare::PolicySpec> {
        cfg.spec2
            .as_ref()
            .with_context(|| format!("metric `{}` needs spec2", m.as_str()))
    };

    let mut gte = None;
    let mut dm = None;
    for &metric in &cfg.metrics {
        match metric {
            Metric::Regret => {
                for slot in 0..slots {
                    let r = mean_regret(&summaries, slot)?;
                    let p = mean_pseudo_regret(&summaries, slot)?;
                    report.lines.push(format!(
                        "slot {}: regret {:.4} (se {:.4}), pseudo-regret {:.4} (se {:.4})",
                        slot + 1,
                        r.mean,
                        r.se,
                        p.mean,
                        p.se
                    ));
                    push("regret", Some(slot), r.mean, r.se, "");
                    push("pseudo_regret", Some(slot), p.mean, p.se, "");
                }
            }
            Metric::Dm => {
                let e = dm_estimate(&summaries)?;
                report.lines.push(format!("dm: {:.4} (se {:.4})", e.mean, e.se));
                push("dm", None, e.mean, e.se, "");
                dm = Some(e);
            }
            Metric::Gte => {
                let s2 = need_pair(metric)?;
                let e = gte_reference(&cfg.spec1, s2, &inst, t, cfg.gte_horizon, reps, seed)?;
                report.lines.push(format!("gte: {:.4} (se {:.4})", e.mean, e.se));
                push("gte", None, e.mean, e.se, "");
                gte = Some(e);
            }
            Metric::Verdict => {
                let s2 = need_pair(metric)?;
                let g = match &gte {
                    Some(g) => g.clone(),
                    None => gte_reference(&cfg.spec1, s2, &inst, t, cfg.gte_horizon, reps, seed)?,
                };
                let d = match &dm {
                    Some(d) => d.clone(),
                    None => dm_estimate(&summaries)?,
                };
                let v = sign_verdict(&g, &d, cfg.z_threshold);
                report.lines.push(format!(
                    "sign verdict: {} (z_gte {:.2}, z_dm {:.2})",
                    v.verdict.as_str(),
                    v.z_gte,
                    v.z_dm
                ));
                push("sign_verdict", None, v.z_dm, v.z_gte, v.verdict.as_str());
            }
            Metric::ProbCorrect => {
                need_pair(metric)?;
                let e = prob_correct_comparison(&summaries, Slot::First)?;
                report.lines.push(format!(
                    "P(slot 1 has lower regret): {:.4} (se {:.4})",
                    e.mean, e.se
                ));
                push("prob_slot1_lower", None, e.mean, e.se, "");
            }
            Metric::Curve => {
                let rows = curve_rows(
                    &cfg.experiment_id,
                    mode,
                    &cfg.spec1,
                    cfg.spec2.as_ref(),
                    &inst,
                    t,
                    reps,
                    seed,
                )?;
                let cpath = sibling(path, "curve");
                let cells: Vec<_> = rows.iter().map(CurveRow::cells).collect();
                emit_csv(&cpath, &metadata(cfg), &CURVE_HEADER, &cells)?;
                report.files.push(cpath);
            }
            Metric::Condition12 => {
                let tail = optimal_pull_tail(&cfg.spec1, &inst, t, reps, seed)?;
                report.lines.push(tail_line(&tail));
                push(
                    "optimal_pull_tail",
                    Some(0),
                    tail.estimate.mean,
                    tail.estimate.se,
                    &format!("threshold={}", fmt_g17(tail.threshold)),
                );
            }
        }
    }
    emit_csv(path, &metadata(cfg), &SUMMARY_HEADER, &rows)?;
    report.files.insert(0, path.to_path_buf());
    Ok(report)
}

fn tail_line(tail: &banditshare::metrics::TailEstimate) -> String {
    format!(
        "P(N_best <= {:.2}) = {:.5} (se {:.5}) at T = {}; implied c = {:.3}",
        tail.threshold,
        tail.estimate.mean,
        tail.estimate.se,
        tail.horizon,
        tail.implied_constant()
    )
}

/// Estimates the optimal-arm tail of `spec1` partnered with greedy at the
/// config's (first) horizon.
pub fn check_condition12(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Report> {
    let inst = cfg.instance()?;
    let t = cfg.horizons[0];
    let tail = optimal_pull_tail(&cfg.spec1, &inst, t, cfg.replications, cfg.seed)?;
    let path = sibling(&output_path(cfg, out_dir), "condition12");
    let row = vec![
        cfg.experiment_id.clone(),
        t.to_string(),
        fmt_g17(tail.threshold),
        fmt_g17(tail.estimate.mean),
        fmt_g17(tail.estimate.se),
        tail.estimate.reps.to_string(),
        fmt_g17(tail.implied_constant()),
    ];
    emit_csv(&path, &metadata(cfg), &TAIL_HEADER, &[row])?;
    Ok(Report {
        files: vec![path],
        lines: vec![tail_line(&tail)],
    })
}

/// Classifies every (experiment, mode, slot) curve in a curve-schema CSV
/// whose `t` column holds at least four horizons.
pub fn ratefit_file(input: &Path, output: Option<&Path>, th: &Thresholds) -> Result<Report> {
    let (header, records) = read_csv(input)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{}: missing column `{name}`", input.display()))
    };
    let (id, mode, slot) = (col("experiment_id")?, col("mode")?, col("algo_slot")?);
    let (t, mean, se) = (col("t")?, col("mean_regret")?, col("se")?);

    let mut groups: BTreeMap<(String, String, String), Vec<RatePoint>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let num = |c: usize| -> Result<f64> {
            r[c].parse()
                .with_context(|| format!("row {}: `{}` is not a number", i + 1, r[c]))
        };
        groups
            .entry((r[id].clone(), r[mode].clone(), r[slot].clone()))
            .or_default()
            .push(RatePoint {
                horizon: r[t]
                    .parse()
                    .with_context(|| format!("row {}: bad horizon `{}`", i + 1, r[t]))?,
                mean: num(mean)?,
                se: num(se)?,
            });
    }
    if groups.is_empty() {
        bail!("{}: no curve rows", input.display());
    }

    let mut report = Report::default();
    let mut rows = Vec::new();
    for ((id, mode, slot), points) in groups {
        let curve = RateCurve::new(points, format!("{id}[{slot}]"), mode.clone())
            .with_context(|| format!("curve {id}[{slot}] ({mode})"))?;
        let g = classify_growth(&curve, th).with_context(|| format!("curve {}", curve.label))?;
        report.lines.push(format!(
            "{} {mode}: slope {:.3} (se {:.3}), R2(log) {:.3} -> {}{}",
            curve.label,
            g.slope,
            g.slope_se,
            g.r2_log,
            g.label,
            if g.near_edge { " (near a band edge)" } else { "" }
        ));
        rows.push(
            ClassificationRow {
                pair: curve.label.clone(),
                mode,
                slope: g.slope,
                slope_se: g.slope_se,
                r2_log: g.r2_log,
                label: g.label.to_string(),
            }
            .cells(),
        );
    }
    let out = output.map(Path::to_path_buf).unwrap_or_else(|| sibling(input, "ratefit"));
    let md = [("source", input.display().to_string())];
    emit_csv(&out, &md, &CLASSIFICATION_HEADER, &rows)?;
    report.files.push(out);
    Ok(report)
}
