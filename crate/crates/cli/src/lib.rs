//! Batch front-end: configuration files, the four study presets, and the
//! output bundle writer.

pub mod config;
pub mod preset;
pub mod runner;
pub mod spectrum;

use std::path::PathBuf;

pub use config::ExperimentConfig;
pub use runner::{run_config, RunOutcome};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ENAQT_OUT_DIR";

/// `--out` beats the config file, which beats `$ENAQT_OUT_DIR`, then `./out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.outputs.directory.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
