//! `covad`: figure data, parameter sweeps and oracle validation for the
//! covert access and advertising models.

mod commands;
mod config;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use covad_core::uplink::Modulation;

use crate::commands::Context;
use crate::config::{ChannelPair, RangeConfig, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Failure(String),
    #[error(transparent)]
    Core(#[from] covad_core::Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn field(path: &str, e: covad_core::Error) -> Self {
        CliError::Config(format!("{path}: {e}"))
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "covad", version, about = "Covert edge access and targeted advertising models")]
struct Cli {
    /// JSON scenario configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's run.output_dir).
    #[arg(long, global = true, env = "COVAD_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples per check.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal advertising paths and profit for each η₁.
    Advert {
        #[arg(long, value_delimiter = ',')]
        eta1: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        horizon: Option<f64>,
    },
    /// Covert rate, noise and jamming power versus bandwidth.
    DownlinkSweep {
        /// lo:hi:steps in Hz.
        #[arg(long)]
        bandwidth_range: Option<RangeConfig>,
    },
    /// Average BER versus transmit power.
    UplinkSweep {
        /// lo:hi:steps in dBW.
        #[arg(long, allow_hyphen_values = true)]
        power_range_dbw: Option<RangeConfig>,
        #[arg(long, value_delimiter = ',')]
        modulations: Option<Vec<Modulation>>,
        /// Comma-separated m:m_s pairs.
        #[arg(long, value_delimiter = ',')]
        channels: Option<Vec<ChannelPair>>,
    },
    /// Per-user basic bandwidth and the resulting selling horizon.
    Immersion,
    /// Compare analytic results with Monte Carlo and ODE oracles.
    Validate,
    /// Write fig1.csv, fig2.csv and fig3.csv.
    Figures,
    /// Print the effective configuration with all defaults filled in.
    ShowConfig,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    let validate_samples = cli.samples.unwrap_or(cfg.run.mc_samples);
    if let Some(samples) = cli.samples {
        cfg.run.mc_samples = samples;
    }
    if let Some(out) = &cli.out {
        cfg.run.output_dir = out.clone();
    }
    cfg.validate()?;
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failure(e.to_string()))?;
    }
    if matches!(cli.command, Command::ShowConfig) {
        println!("{}", cfg.to_json());
        return Ok(true);
    }
    let out_dir = output::ensure_dir(&cfg.run.output_dir)?;
    let ctx = Context::new(cfg, out_dir);
    match cli.command {
        Command::Advert { eta1, horizon } => commands::advert(&ctx, eta1, horizon)?,
        Command::DownlinkSweep { bandwidth_range } => commands::downlink_sweep(&ctx, bandwidth_range)?,
        Command::UplinkSweep { power_range_dbw, modulations, channels } => {
            commands::uplink_sweep(&ctx, power_range_dbw, modulations, channels)?
        }
        Command::Immersion => commands::immersion(&ctx)?,
        Command::Validate => return validate::validate(&ctx, validate_samples),
        Command::Figures => commands::figures(&ctx)?,
        Command::ShowConfig => unreachable!("handled before output setup"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("covad: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
