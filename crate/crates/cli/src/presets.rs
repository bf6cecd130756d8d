//! Named experiments reproducing the standard figures.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use banditshare::metrics::{individual_summaries, mean_regret, PairMode};
use banditshare::ratefit::Thresholds;
use banditshare::{BanditInstance, DistributionKind, PolicySpec, TapePairing};

use crate::config::{DEFAULT_C, DEFAULT_HORIZON, DEFAULT_MEANS, DEFAULT_PRIOR_SIZE, DEFAULT_REPLICATIONS};
use crate::csv::{emit_csv, heatmap_header, CurveRow, CLASSIFICATION_HEADER, CURVE_HEADER};
use crate::experiments::{curve_rows, heatmap, sweep, Family, ALPHA_GRID, GAMMA_GRID, RATE_GRID};

pub const PRESETS: [&str; 8] = [
    "fig2a",
    "fig2b",
    "fig3_egreedy",
    "fig3_ucb",
    "fig4_egreedy",
    "fig4_ucb",
    "fig5",
    "exp3_oneway",
];

pub const DEFAULT_SWEEP_REPLICATIONS: usize = 1_000;

#[derive(Debug, Clone)]
pub struct PresetOptions {
    pub seed: u64,
    /// Overrides the preset's replication count.
    pub reps: Option<usize>,
    pub out_dir: PathBuf,
}

struct Ctx<'a> {
    name: &'a str,
    instance: BanditInstance,
    seed: u64,
    reps: usize,
    out_dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn metadata(&self, extra: &[(&str, String)]) -> Vec<(String, String)> {
        let mut md = vec![
            ("preset".to_string(), self.name.to_string()),
            ("instance".to_string(), format!("bernoulli{:?}", self.instance.means())),
            ("seed".to_string(), self.seed.to_string()),
            ("reps".to_string(), self.reps.to_string()),
        ];
        md.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
        md
    }

    fn write<H: AsRef<str>>(
        &mut self,
        file: &str,
        extra: &[(&str, String)],
        header: &[H],
        rows: Vec<Vec<String>>,
    ) -> Result<()> {
        let path = self.out_dir.join(file);
        emit_csv(&path, &self.metadata(extra), header, &rows)?;
        self.written.push(path);
        Ok(())
    }
}

pub fn run_preset(name: &str, opts: &PresetOptions) -> Result<Vec<PathBuf>> {
    if !PRESETS.contains(&name) {
        bail!("unknown preset `{name}` (available: {})", PRESETS.join(", "));
    }
    let default_reps = if name == "exp3_oneway" {
        DEFAULT_SWEEP_REPLICATIONS
    } else {
        DEFAULT_REPLICATIONS
    };
    let reps = opts.reps.unwrap_or(default_reps);
    if reps < 2 {
        bail!("--reps must be at least 2 for standard errors");
    }
    let mut ctx = Ctx {
        name,
        instance: BanditInstance::new(&DEFAULT_MEANS, DistributionKind::Bernoulli)?,
        seed: opts.seed,
        reps,
        out_dir: &opts.out_dir,
        written: Vec::new(),
    };
    match name {
        "fig2a" => fig2(&mut ctx, PolicySpec::EGreedy { alpha: 0.0, c: DEFAULT_C })?,
        "fig2b" => fig2(&mut ctx, PolicySpec::Ucb { alpha: 0.0 })?,
        "fig3_egreedy" => fig3(&mut ctx, Family::EGreedy { c: DEFAULT_C })?,
        "fig3_ucb" => fig3(&mut ctx, Family::Ucb)?,
        "fig4_egreedy" => fig4(&mut ctx, Family::EGreedy { c: DEFAULT_C })?,
        "fig4_ucb" => fig4(&mut ctx, Family::Ucb)?,
        "fig5" => fig5(&mut ctx)?,
        _ => exp3_oneway(&mut ctx)?,
    }
    Ok(ctx.written)
}

/// Greedy against a partner: cumulative regret curves, individually and
/// jointly.
fn fig2(ctx: &mut Ctx, partner: PolicySpec) -> Result<()> {
    let t = DEFAULT_HORIZON;
    let greedy = PolicySpec::Greedy;
    let mut rows: Vec<CurveRow> = Vec::new();
    for mode in [PairMode::Individual(TapePairing::Shared), PairMode::Joint] {
        rows.extend(curve_rows(
            ctx.name,
            mode,
            &greedy,
            Some(&partner),
            &ctx.instance,
            t,
            ctx.reps,
            ctx.seed,
        )?);
    }
    let file = format!("{}.csv", ctx.name);
    let md = [
        ("experiment_id", ctx.name.to_string()),
        ("spec1", greedy.to_string()),
        ("spec2", partner.to_string()),
        ("horizon", t.to_string()),
        ("tapes", "shared".to_string()),
        ("regret", "realized".to_string()),
    ];
    ctx.write(&file, &md, &CURVE_HEADER, rows.iter().map(CurveRow::cells).collect())
}

fn grid_meta(family: Family, grid: &[f64], mode: &str, tapes: Option<&str>) -> Vec<(&'static str, String)> {
    let mut md = vec![
        ("family", family.describe()),
        ("grid", format!("{grid:?}")),
        ("mode", mode.to_string()),
        ("horizon", DEFAULT_HORIZON.to_string()),
    ];
    if let Some(t) = tapes {
        md.push(("tapes", t.to_string()));
    }
    md
}

fn write_heatmap(
    ctx: &mut Ctx,
    file: &str,
    family: Family,
    grid: &[f64],
    mode: PairMode,
) -> Result<()> {
    let cells = heatmap(family, grid, mode, &ctx.instance, DEFAULT_HORIZON, ctx.reps, ctx.seed)?;
    let rows = cells
        .iter()
        .map(|c| c.row().map(|r| r.cells()))
        .collect::<banditshare::Result<Vec<_>>>()?;
    let tapes = match mode {
        PairMode::Individual(TapePairing::Independent) => Some("independent"),
        PairMode::Individual(TapePairing::Shared) => Some("shared"),
        _ => None,
    };
    let md = grid_meta(family, grid, mode.run_mode().as_str(), tapes);
    ctx.write(file, &md, &heatmap_header(family.param_name()), rows)
}

/// Mean individual regret of each grid point at `T`, in the curve schema.
fn write_individual_line(ctx: &mut Ctx, file: &str, family: Family, grid: &[f64]) -> Result<()> {
    let mut rows = Vec::new();
    for &p in grid {
        let spec = family.spec(p);
        let s = individual_summaries(&spec, &ctx.instance, DEFAULT_HORIZON, ctx.reps, ctx.seed)?;
        let e = mean_regret(&s, 0)?;
        rows.push(
            CurveRow {
                experiment_id: ctx.name.to_string(),
                mode: "individual".into(),
                algo_slot: 1,
                spec,
                t: DEFAULT_HORIZON,
                mean_regret: e.mean,
                se: e.se,
                reps: e.reps,
            }
            .cells(),
        );
    }
    let md = grid_meta(family, grid, "individual", None);
    ctx.write(file, &md, &CURVE_HEADER, rows)
}

fn fig3(ctx: &mut Ctx, family: Family) -> Result<()> {
    let name = ctx.name.to_string();
    write_heatmap(ctx, &format!("{name}.csv"), family, &ALPHA_GRID, PairMode::Joint)?;
    write_individual_line(ctx, &format!("{name}_individual.csv"), family, &ALPHA_GRID)
}

fn fig4(ctx: &mut Ctx, family: Family) -> Result<()> {
    let name = ctx.name.to_string();
    write_heatmap(
        ctx,
        &format!("{name}_individual.csv"),
        family,
        &ALPHA_GRID,
        PairMode::Individual(TapePairing::Independent),
    )?;
    write_heatmap(ctx, &format!("{name}_joint.csv"), family, &ALPHA_GRID, PairMode::Joint)
}

fn fig5(ctx: &mut Ctx) -> Result<()> {
    let family = Family::Thompson { m: DEFAULT_PRIOR_SIZE };
    write_individual_line(ctx, "fig5_individual.csv", family, &GAMMA_GRID)?;
    write_heatmap(
        ctx,
        "fig5_individual_pairs.csv",
        family,
        &GAMMA_GRID,
        PairMode::Individual(TapePairing::Independent),
    )?;
    write_heatmap(ctx, "fig5_joint.csv", family, &GAMMA_GRID, PairMode::Joint)
}

/// EXP3 as the source and greedy as the sink of one-way sharing, swept over
/// the rate grid.
fn exp3_oneway(ctx: &mut Ctx) -> Result<()> {
    let (src, sink) = (PolicySpec::Exp3, PolicySpec::Greedy);
    let s = sweep(
        PairMode::OneWay,
        &src,
        Some(&sink),
        &ctx.instance,
        &RATE_GRID,
        ctx.reps,
        ctx.seed,
    )?;
    let md = [
        ("experiment_id", ctx.name.to_string()),
        ("spec1", src.to_string()),
        ("spec2", sink.to_string()),
        ("mode", "one_way".to_string()),
        ("horizons", format!("{RATE_GRID:?}")),
        ("regret", "pseudo".to_string()),
    ];
    let rows = s.curve_rows(ctx.name).iter().map(CurveRow::cells).collect();
    ctx.write("exp3_oneway.csv", &md, &CURVE_HEADER, rows)?;
    let class = s
        .classification_rows(ctx.name, &Thresholds::default())?
        .iter()
        .map(|r| r.cells())
        .collect();
    ctx.write("exp3_oneway_ratefit.csv", &md, &CLASSIFICATION_HEADER, class)
}
