use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use enaqt_cli::config::NoiseKind;
use enaqt_cli::preset::preset;
use enaqt_cli::spectrum::validate_spectra;
use enaqt_cli::{resolve_out_dir, run_config, ExperimentConfig};

#[derive(Parser)]
#[command(name = "enaqt", version, about = "Noise-assisted transport in disordered spin networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Source {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in study: fig1, fig2, fig3 or fig4.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self, fallback: Option<&str>) -> Result<ExperimentConfig> {
        match (&self.config, &self.preset, fallback) {
            (Some(path), _, _) => ExperimentConfig::load(path),
            (None, Some(name), _) => preset(name),
            (None, None, Some(name)) => preset(name),
            (None, None, None) => bail!("give --config <file> or --preset <name>"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run ensembles and write the output bundle.
    Run {
        #[command(flatten)]
        source: Source,
        /// Override run.master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override run.workers (0 = all processors).
        #[arg(long)]
        workers: Option<usize>,
        /// Override run.n_realizations.
        #[arg(long)]
        realizations: Option<usize>,
        /// Output directory (default: outputs.directory, then $ENAQT_OUT_DIR, then ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a preset configuration as TOML.
    Preset {
        #[arg(long)]
        name: String,
    },
    /// Check synthesized noise against its target spectra (default: fig4 models).
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        validate: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { source, seed, workers, realizations, out } => {
            let mut cfg = source.load(None)?;
            if let Some(s) = seed {
                cfg.run.master_seed = s;
            }
            if let Some(w) = workers {
                cfg.run.workers = w;
            }
            if let Some(n) = realizations {
                cfg.run.n_realizations = n;
            }
            cfg.validate()?;
            let dir = resolve_out_dir(out, &cfg);
            let outcome = run_config(&cfg, &dir)?;
            for c in &outcome.checks {
                if !c.passed {
                    eprintln!("check failed: {} ({})", c.name, c.detail);
                }
            }
            println!("{}", outcome.manifest.display());
            Ok(outcome.passed())
        }
        Command::Preset { name } => {
            print!("{}", preset(&name)?.to_toml()?);
            Ok(true)
        }
        Command::Spectrum { source, validate } => {
            let cfg = source.load(Some("fig4"))?;
            if cfg.noise.kind != NoiseKind::Gaussian {
                bail!("configuration has no Gaussian noise spectra");
            }
            let reports = validate_spectra(&cfg)?;
            for r in &reports {
                for p in &r.probes {
                    println!(
                        "{:<14} ω = {:>10.2} rad/s  target {:.4e}  estimate {:.4e}  error {:>5.1}%",
                        r.name,
                        p.omega,
                        p.target,
                        p.estimate,
                        100.0 * p.relative_error
                    );
                }
            }
            Ok(!validate || reports.iter().all(|r| r.passed))
        }
    }
}
