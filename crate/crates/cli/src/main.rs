use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use banditshare::ratefit::{Thresholds, Weighting};
use banditshare_cli::config::DEFAULT_SEED;
use banditshare_cli::run::{check_condition12, ratefit_file, run_config, Report};
use banditshare_cli::{parse_config_file, run_preset, PresetOptions};
use clap::{Parser, Subcommand};

/// Bandit algorithms compared through shared-data A/B experiments.
#[derive(Debug, Parser)]
#[command(name = "banditshare", version)]
struct Cli {
    /// Default output directory.
    #[arg(long, global = true, env = "BANDITSHARE_OUT", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run { config: PathBuf },
    /// Run a named figure preset.
    Preset {
        name: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        reps: Option<usize>,
        /// Output directory (overrides the default).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the growth of regret curves in a curve CSV.
    Ratefit {
        csv: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Weight the log-log fit by inverse variance.
        #[arg(long)]
        weighted: bool,
    },
    /// Estimate the optimal-arm tail of spec1 partnered with greedy.
    CheckCondition12 { config: PathBuf },
}

fn print(report: &Report) {
    for line in &report.lines {
        println!("{line}");
    }
    for f in &report.files {
        eprintln!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => print(&run_config(&parse_config_file(&config)?, &cli.out_dir)?),
        Command::Preset {
            name,
            seed,
            reps,
            out,
        } => {
            let opts = PresetOptions {
                seed,
                reps,
                out_dir: out.unwrap_or(cli.out_dir),
            };
            for f in run_preset(&name, &opts)? {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Ratefit {
            csv,
            output,
            weighted,
        } => {
            let th = Thresholds {
                weighting: if weighted {
                    Weighting::InverseVariance
                } else {
                    Weighting::Unweighted
                },
                ..Thresholds::default()
            };
            print(&ratefit_file(&csv, output.as_deref(), &th)?);
        }
        Command::CheckCondition12 { config } => {
            print(&check_condition12(&parse_config_file(&config)?, &cli.out_dir)?)
        }
    }
    Ok(())
}
