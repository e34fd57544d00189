//! Experiment runner: TOML manifests in, CSV tables and JSON run records
//! out.

pub mod circuit_io;
pub mod config;
pub mod experiments;
pub mod fit;
pub mod records;

use std::path::PathBuf;

use config::ConfigError;
use fit::FitError;
use mbl_vqe_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_ALL_FAILED: i32 = 4;

/// Process exit code for an error chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() || cause.is::<FitError>() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::ResourceLimit(_) => EXIT_RESOURCE,
                CoreError::AllTrialsFailed(_) => EXIT_ALL_FAILED,
                CoreError::InvalidParameters(_) => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}

/// Run an experiment and write `<experiment>.csv`, `<experiment>.json` and
/// a `<experiment>.timing.json` sidecar into the output directory.
pub fn run_and_write(cfg: &config::ExperimentConfig) -> anyhow::Result<(PathBuf, PathBuf)> {
    let start = std::time::Instant::now();
    let record = experiments::run(cfg)?;
    let paths = record.write(&cfg.output.dir)?;
    let timing = serde_json::json!({
        "config_hash": record.config_hash,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    std::fs::write(
        cfg.output.dir.join(format!("{}.timing.json", record.experiment)),
        serde_json::to_string_pretty(&timing)? + "\n",
    )?;
    Ok(paths)
}
