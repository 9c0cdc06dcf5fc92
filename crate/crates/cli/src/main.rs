use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use danse_core::{run_experiment, ExperimentOptions, Mode, Scenario};
use log::info;

/// Simulates WOLA-based DANSE over a network of asynchronous nodes and
/// reports enhancement and synchronization metrics.
#[derive(Debug, Parser)]
#[command(name = "danse-sim", version)]
struct Args {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,

    /// Processing mode; repeat to run several. Defaults to all of them.
    #[arg(long = "mode")]
    modes: Vec<Mode>,

    /// Named clock-offset set: small, moderate, large or custom (keep the
    /// offsets from the config).
    #[arg(long, value_parser = ["small", "moderate", "large", "custom"])]
    sro_set: Option<String>,

    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, default_value = "out")]
    out_dir: PathBuf,

    /// Write one WAV per node and mode, plus the reference-microphone inputs.
    #[arg(long)]
    export_signals: bool,

    /// Write per-pair SRO estimate traces.
    #[arg(long)]
    export_traces: bool,
}

fn run(args: Args) -> Result<()> {
    let scenario = Scenario::from_file(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    let modes = if args.modes.is_empty() { Mode::ALL.to_vec() } else { args.modes };
    let opts = ExperimentOptions {
        scenario,
        modes,
        sro_set: args.sro_set,
        seed: args.seed,
        out_dir: Some(args.out_dir.clone()),
        export_signals: args.export_signals,
        export_traces: args.export_traces,
    };
    let exp = run_experiment(&opts)?;
    print!("{}", exp.report.to_csv());
    info!("results written to {}", args.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
