//! CSV output shared by `run`, `preset` and `ratefit`.
//!
//! Every file starts with `# key=value` metadata lines followed by a header
//! row; floats are written with 17 significant digits so they round-trip.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use banditshare::PolicySpec;

pub const CURVE_HEADER: [&str; 12] = [
    "experiment_id",
    "mode",
    "algo_slot",
    "policy_kind",
    "alpha",
    "C",
    "m",
    "gamma",
    "t",
    "mean_regret",
    "se",
    "reps",
];

pub const CLASSIFICATION_HEADER: [&str; 6] = ["pair", "mode", "slope", "slope_se", "r2_log", "label"];

pub const SUMMARY_HEADER: [&str; 8] = [
    "experiment_id",
    "mode",
    "metric",
    "algo_slot",
    "value",
    "se",
    "reps",
    "label",
];

pub const TAIL_HEADER: [&str; 7] = [
    "experiment_id",
    "horizon",
    "threshold",
    "tail_prob",
    "se",
    "reps",
    "implied_c",
];

/// Heatmap header; `param` is `alpha` or `gamma`.
pub fn heatmap_header(param: &str) -> Vec<String> {
    vec![
        format!("{param}1"),
        format!("{param}2"),
        "mean_diff".into(),
        "se".into(),
        "prob_correct".into(),
        "prob_se".into(),
        "reps".into(),
    ]
}

/// C-style `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g17).unwrap_or_default()
}

/// One curve-schema row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub experiment_id: String,
    pub mode: String,
    /// 1-based.
    pub algo_slot: usize,
    pub spec: PolicySpec,
    pub t: usize,
    pub mean_regret: f64,
    pub se: f64,
    pub reps: usize,
}

impl CurveRow {
    pub fn cells(&self) -> Vec<String> {
        vec![
            self.experiment_id.clone(),
            self.mode.clone(),
            self.algo_slot.to_string(),
            self.spec.kind().to_string(),
            fmt_opt(self.spec.alpha()),
            fmt_opt(self.spec.c()),
            fmt_opt(self.spec.prior_size()),
            fmt_opt(self.spec.prior_skew()),
            self.t.to_string(),
            fmt_g17(self.mean_regret),
            fmt_g17(self.se),
            self.reps.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapRow {
    pub param1: f64,
    pub param2: f64,
    pub mean_diff: f64,
    pub se: f64,
    pub prob_correct: f64,
    pub prob_se: f64,
    pub reps: usize,
}

impl HeatmapRow {
    pub fn cells(&self) -> Vec<String> {
        vec![
            fmt_g17(self.param1),
            fmt_g17(self.param2),
            fmt_g17(self.mean_diff),
            fmt_g17(self.se),
            fmt_g17(self.prob_correct),
            fmt_g17(self.prob_se),
            self.reps.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRow {
    pub pair: String,
    pub mode: String,
    pub slope: f64,
    pub slope_se: f64,
    pub r2_log: f64,
    pub label: String,
}

impl ClassificationRow {
    pub fn cells(&self) -> Vec<String> {
        vec![
            self.pair.clone(),
            self.mode.clone(),
            fmt_g17(self.slope),
            fmt_g17(self.slope_se),
            fmt_g17(self.r2_log),
            self.label.clone(),
        ]
    }
}

/// Writes metadata comments, a header and rows. An empty `rows` still
/// produces a valid header-only file.
pub fn write_csv<W: Write, K: AsRef<str>, V: AsRef<str>, H: AsRef<str>>(
    out: W,
    metadata: &[(K, V)],
    header: &[H],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = out;
    for (k, v) in metadata {
        writeln!(out, "# {}={}", k.as_ref(), v.as_ref())?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header.iter().map(|h| h.as_ref()))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv<K: AsRef<str>, V: AsRef<str>, H: AsRef<str>>(
    path: &Path,
    metadata: &[(K, V)],
    header: &[H],
    rows: &[Vec<String>],
) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(std::io::BufWriter::new(file), metadata, header, rows)
        .with_context(|| format!("writing {}", path.display()))
}

/// Reads a CSV with `#` comments into its header and string records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("reading {}", path.display()))?;
    Ok((header, rows))
}
