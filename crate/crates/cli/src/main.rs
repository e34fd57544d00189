use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mbl_vqe::config::{ConfigSources, Experiment, ExperimentConfig, SEED_ENV};
use mbl_vqe::{exit_code, run_and_write, EXIT_CONFIG};

/// Excited-state VQE experiments on the interacting Aubry-André chain.
#[derive(Debug, Parser)]
#[command(name = "mbl-vqe", version)]
struct Cli {
    /// Experiment to run (overrides `experiment` in the config file).
    #[arg(value_enum)]
    experiment: Option<Experiment>,
    /// TOML experiment manifest.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (takes precedence over the config file and MBLVQE_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Dotted config override, e.g. `sweep.w=[1.5, 8.0]`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    let sources = ConfigSources {
        file: cli.config.as_deref(),
        experiment: cli.experiment,
        overrides: &cli.overrides,
        env_seed: std::env::var(SEED_ENV).ok(),
        seed: cli.seed,
        out: cli.out.as_deref(),
    };
    let result = ExperimentConfig::load(&sources)
        .map_err(anyhow::Error::from)
        .and_then(|cfg| run_and_write(&cfg));
    match result {
        Ok((csv, json)) => {
            println!("{}\n{}", csv.display(), json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
