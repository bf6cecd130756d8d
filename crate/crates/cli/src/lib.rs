//! Config-driven experiments, figure presets and CSV output for
//! `banditshare`.

pub mod config;
pub mod csv;
pub mod experiments;
pub mod presets;
pub mod run;

pub use config::{parse_config, parse_config_file, ConfigError, ExperimentConfig};
pub use presets::{run_preset, PresetOptions, PRESETS};
