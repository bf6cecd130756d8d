//! Experiment configuration files (TOML).
//!
//! ```toml
//! seed = 7
//! mode = "joint"
//! horizon = 100
//! replications = 10000
//! metrics = ["regret", "dm", "gte", "verdict"]
//!
//! [instance]
//! means = [0.8, 0.2]
//! kind = "bernoulli"
//!
//! [spec1]
//! kind = "greedy"
//!
//! [spec2]
//! kind = "ucb"
//! alpha = 0.0
//! ```

use std::path::{Path, PathBuf};

use banditshare::metrics::HorizonConvention;
use banditshare::ratefit::Thresholds;
use banditshare::runner::{validate_mode, RunMode};
use banditshare::{BanditInstance, DistributionKind, PolicySpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MEANS: [f64; 2] = [0.8, 0.2];
pub const DEFAULT_HORIZON: usize = 100;
pub const DEFAULT_REPLICATIONS: usize = 10_000;
pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_PRIOR_SIZE: f64 = 5.0;
pub const DEFAULT_SEED: u64 = 20_250_101;
pub const DEFAULT_Z: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{slot}: unknown policy kind `{kind}` (expected greedy, egreedy, ucb, exp3 or thompson)")]
    UnknownPolicyKind { slot: &'static str, kind: String },
    #[error("{slot}.{field} = {value} is out of range: {expected}")]
    OutOfRange {
        slot: &'static str,
        field: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("{slot}: `{kind}` requires `{field}`")]
    MissingParameter {
        slot: &'static str,
        kind: &'static str,
        field: &'static str,
    },
    #[error("{slot}: `{kind}` does not take `{field}`")]
    UnexpectedParameter {
        slot: &'static str,
        kind: &'static str,
        field: &'static str,
    },
    #[error("thompson sampling ({slot}) requires a Bernoulli instance, got `{kind}`")]
    ThompsonNonBernoulli { slot: &'static str, kind: String },
    #[error("strict mode requires an explicit `seed`")]
    MissingSeed,
    #[error("mode `{0}` requires both spec1 and spec2")]
    MissingSpec2(&'static str),
    #[error("unknown mode `{0}` (expected individual, joint or one_way)")]
    UnknownMode(String),
    #[error("unknown distribution kind `{0}` (expected bernoulli or beta)")]
    UnknownDistribution(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("unknown gte_horizon `{0}` (expected doubled or experiment)")]
    UnknownGteHorizon(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] banditshare::Error),
}

/// Quantity a `run` computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Regret,
    Dm,
    Gte,
    Verdict,
    ProbCorrect,
    Curve,
    Condition12,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Regret,
        Metric::Dm,
        Metric::Gte,
        Metric::Verdict,
        Metric::ProbCorrect,
        Metric::Curve,
        Metric::Condition12,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Regret => "regret",
            Metric::Dm => "dm",
            Metric::Gte => "gte",
            Metric::Verdict => "verdict",
            Metric::ProbCorrect => "prob_correct",
            Metric::Curve => "curve",
            Metric::Condition12 => "condition12",
        }
    }

    fn parse(s: &str) -> Result<Self, ConfigError> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub means: Vec<f64>,
    pub distribution: DistributionKind,
    pub mode: RunMode,
    pub spec1: PolicySpec,
    pub spec2: Option<PolicySpec>,
    /// One horizon, or a grid for rate sweeps.
    pub horizons: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub gte_horizon: HorizonConvention,
    pub z_threshold: f64,
    pub thresholds: Thresholds,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn instance(&self) -> Result<BanditInstance, ConfigError> {
        Ok(BanditInstance::new(&self.means, self.distribution)?)
    }

    pub fn is_sweep(&self) -> bool {
        self.horizons.len() > 1
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            experiment_id: Some(self.experiment_id.clone()),
            strict: None,
            seed: Some(self.seed),
            mode: Some(self.mode.as_str().to_string()),
            horizon: (!self.is_sweep()).then(|| self.horizons[0]),
            horizons: self.is_sweep().then(|| self.horizons.clone()),
            replications: Some(self.replications),
            metrics: Some(self.metrics.iter().map(|m| m.as_str().to_string()).collect()),
            gte_horizon: Some(
                match self.gte_horizon {
                    HorizonConvention::Doubled => "doubled",
                    HorizonConvention::Experiment => "experiment",
                }
                .to_string(),
            ),
            z_threshold: Some(self.z_threshold),
            output: self.output.clone(),
            instance: Some(RawInstance {
                means: Some(self.means.clone()),
                kind: Some(
                    match self.distribution {
                        DistributionKind::Bernoulli => "bernoulli",
                        DistributionKind::Beta { .. } => "beta",
                    }
                    .to_string(),
                ),
                concentration: match self.distribution {
                    DistributionKind::Beta { concentration } => Some(concentration),
                    DistributionKind::Bernoulli => None,
                },
            }),
            spec1: Some(RawPolicy::from_spec(&self.spec1)),
            spec2: self.spec2.as_ref().map(RawPolicy::from_spec),
            ratefit: Some(self.thresholds),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    means: Option<Vec<f64>>,
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    concentration: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPolicy {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl RawPolicy {
    pub fn from_spec(spec: &PolicySpec) -> Self {
        Self {
            kind: spec.kind().to_string(),
            alpha: spec.alpha(),
            c: spec.c(),
            m: spec.prior_size(),
            gamma: spec.prior_skew(),
        }
    }

    pub fn into_spec(self, slot: &'static str) -> Result<PolicySpec, ConfigError> {
        let kind: &'static str = match self.kind.as_str() {
            "greedy" => "greedy",
            "egreedy" => "egreedy",
            "ucb" => "ucb",
            "exp3" => "exp3",
            "thompson" => "thompson",
            _ => {
                return Err(ConfigError::UnknownPolicyKind {
                    slot,
                    kind: self.kind,
                })
            }
        };
        let takes = |field: &str| match field {
            "alpha" => matches!(kind, "egreedy" | "ucb"),
            "C" => kind == "egreedy",
            "m" | "gamma" => kind == "thompson",
            _ => false,
        };
        for (field, present) in [
            ("alpha", self.alpha.is_some()),
            ("C", self.c.is_some()),
            ("m", self.m.is_some()),
            ("gamma", self.gamma.is_some()),
        ] {
            if present && !takes(field) {
                return Err(ConfigError::UnexpectedParameter { slot, kind, field });
            }
        }
        let unit = |field: &'static str, v: Option<f64>| match v {
            None => Err(ConfigError::MissingParameter { slot, kind, field }),
            Some(x) if (0.0..=1.0).contains(&x) => Ok(x),
            Some(x) => Err(ConfigError::OutOfRange {
                slot,
                field,
                value: x,
                expected: "must lie in [0, 1]",
            }),
        };
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(ConfigError::OutOfRange {
                    slot,
                    field,
                    value: v,
                    expected: "must be positive",
                })
            }
        };
        Ok(match kind {
            "greedy" => PolicySpec::Greedy,
            "exp3" => PolicySpec::Exp3,
            "egreedy" => PolicySpec::EGreedy {
                alpha: unit("alpha", self.alpha)?,
                c: positive("C", self.c.unwrap_or(DEFAULT_C))?,
            },
            "ucb" => PolicySpec::Ucb {
                alpha: unit("alpha", self.alpha)?,
            },
            _ => PolicySpec::Thompson {
                prior_size: positive("m", self.m.unwrap_or(DEFAULT_PRIOR_SIZE))?,
                prior_skew: unit("gamma", self.gamma)?,
            },
        })
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    experiment_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strict: Option<bool>,
    seed: Option<u64>,
    mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizons: Option<Vec<usize>>,
    replications: Option<usize>,
    metrics: Option<Vec<String>>,
    gte_horizon: Option<String>,
    z_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    instance: Option<RawInstance>,
    spec1: Option<RawPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec2: Option<RawPolicy>,
    ratefit: Option<Thresholds>,
}

pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Parses and validates a config, filling the defaults of the two-arm
/// Bernoulli setup (means 0.8 / 0.2, T = 100, 10 000 replications, C = 1).
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;

    let seed = match (raw.seed, raw.strict.unwrap_or(false)) {
        (Some(s), _) => s,
        (None, true) => return Err(ConfigError::MissingSeed),
        (None, false) => DEFAULT_SEED,
    };

    let mode = match raw.mode.as_deref().unwrap_or("joint") {
        "individual" => RunMode::Individual,
        "joint" => RunMode::Joint,
        "one_way" => RunMode::OneWay,
        other => return Err(ConfigError::UnknownMode(other.to_string())),
    };

    let inst = raw.instance.unwrap_or_default();
    let means = inst.means.unwrap_or_else(|| DEFAULT_MEANS.to_vec());
    let distribution = match (inst.kind.as_deref().unwrap_or("bernoulli"), inst.concentration) {
        ("bernoulli", None) => DistributionKind::Bernoulli,
        ("bernoulli", Some(_)) => {
            return Err(ConfigError::Invalid(
                "instance.concentration only applies to kind = \"beta\"".into(),
            ))
        }
        ("beta", c) => DistributionKind::Beta {
            concentration: c.ok_or_else(|| {
                ConfigError::Invalid("instance kind \"beta\" requires `concentration`".into())
            })?,
        },
        (other, _) => return Err(ConfigError::UnknownDistribution(other.to_string())),
    };

    let spec1 = raw
        .spec1
        .ok_or_else(|| ConfigError::Invalid("missing [spec1]".into()))?
        .into_spec("spec1")?;
    let spec2 = raw.spec2.map(|p| p.into_spec("spec2")).transpose()?;
    if spec2.is_none() && mode != RunMode::Individual {
        return Err(ConfigError::MissingSpec2(mode.as_str()));
    }

    let instance = BanditInstance::new(&means, distribution)?;
    if let Some((_, kind)) = instance.non_bernoulli_arm() {
        for (slot, spec) in [("spec1", Some(&spec1)), ("spec2", spec2.as_ref())] {
            if let Some(PolicySpec::Thompson { .. }) = spec {
                return Err(ConfigError::ThompsonNonBernoulli {
                    slot,
                    kind: kind.to_string(),
                });
            }
        }
    }
    validate_mode(mode, &spec1, spec2.as_ref(), &instance)?;

    let horizons = match (raw.horizon, raw.horizons) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid(
                "give either `horizon` or `horizons`, not both".into(),
            ))
        }
        (Some(t), None) => vec![t],
        (None, Some(grid)) => grid,
        (None, None) => vec![DEFAULT_HORIZON],
    };
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(ConfigError::Invalid("horizons must be at least 1".into()));
    }
    if horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::Invalid(
            "horizons must be strictly increasing".into(),
        ));
    }

    let replications = raw.replications.unwrap_or(DEFAULT_REPLICATIONS);
    if replications == 0 {
        return Err(ConfigError::Invalid("replications must be at least 1".into()));
    }

    let metrics = match raw.metrics {
        Some(names) => names
            .iter()
            .map(|s| Metric::parse(s))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![Metric::Regret],
    };

    let gte_horizon = match raw.gte_horizon.as_deref().unwrap_or("doubled") {
        "doubled" => HorizonConvention::Doubled,
        "experiment" => HorizonConvention::Experiment,
        other => return Err(ConfigError::UnknownGteHorizon(other.to_string())),
    };

    let z_threshold = raw.z_threshold.unwrap_or(DEFAULT_Z);
    if z_threshold.is_nan() || z_threshold < 0.0 {
        return Err(ConfigError::Invalid("z_threshold must be nonnegative".into()));
    }

    let experiment_id = raw.experiment_id.unwrap_or_else(|| match &spec2 {
        Some(s2) => format!("{}-{}-{}", mode.as_str(), spec1, s2),
        None => format!("{}-{}", mode.as_str(), spec1),
    });

    Ok(ExperimentConfig {
        experiment_id,
        means,
        distribution,
        mode,
        spec1,
        spec2,
        horizons,
        replications,
        seed,
        metrics,
        gte_horizon,
        z_threshold,
        thresholds: raw.ratefit.unwrap_or_default(),
        output: raw.output,
    })
}
