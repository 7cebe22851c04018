//! Batch experiment driver: every library module behind a subcommand, with a
//! TOML config, explicit seeds, atomic CSV/JSON outputs and a run manifest.

pub mod commands;
pub mod config;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use manifest::RunManifest;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_DOMAIN: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] weakcalc::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use weakcalc::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(
                E::NonConvergence { .. }
                | E::ZeroCrossing { .. }
                | E::BranchJump { .. }
                | E::EnvelopeSearchFailed(_)
                | E::NoBracket { .. },
            ) => EXIT_NUMERIC,
            CliError::Model(E::InvalidConfig(_) | E::InvalidGrid(_) | E::InvalidInterval { .. }) => EXIT_CONFIG,
            CliError::Model(_) => EXIT_DOMAIN,
            // I/O failures are not one of the documented classes; treat them like a bad --out.
            CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "weakcalc",
    version,
    about = "Weak moments, transforms and limit theorems for heavy-tailed laws"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every random experiment.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Override a config value, e.g. `--set experiment.reps=1000`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Weak moments m_0..m_N.
    Moments,
    /// Weak characteristic function and unwrapped cgf on a symmetric grid.
    Cf,
    /// Weak cumulants of the (normalised) pair.
    Cumulants,
    /// Transform-space CLT: sup errors, Berry-Esseen bound, fitted rate.
    Clt,
    /// Distributional CLT for the kernel-weighted density: KS by n.
    Distclt,
    /// Hermite recovery of a density from Gaussian-kernel weak moments.
    Recover,
    /// Weighted CDF via mollified indicators.
    Cdf,
    /// Tikhonov reconstruction on a (delta, lambda) lattice.
    Tikhonov,
    /// Monte Carlo study of the Cauchy location estimator.
    Estimate,
    /// Gevrey (weighted-sup) diagnostic of the kernel.
    Gevrey,
    /// Carleman partial sums of the kernel's even moments.
    Carleman,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Cf => "cf",
            Command::Cumulants => "cumulants",
            Command::Clt => "clt",
            Command::Distclt => "distclt",
            Command::Recover => "recover",
            Command::Cdf => "cdf",
            Command::Tikhonov => "tikhonov",
            Command::Estimate => "estimate",
            Command::Gevrey => "gevrey",
            Command::Carleman => "carleman",
        }
    }
}

/// Runs a parsed invocation end to end and returns the manifest written.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    if let Some(n) = cli.threads {
        // A second call in the same process (tests) fails harmlessly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let started = std::time::Instant::now();
    let tables = commands::execute(cli.command, &cfg, cli.seed)?;
    let mut outputs = Vec::new();
    for (suffix, table) in &tables {
        let (ext, body) = match cli.format {
            Format::Csv => ("csv", table.to_csv()),
            Format::Json => ("json", table.to_json()),
        };
        let name = match suffix {
            Some(s) => format!("{}_{s}.{ext}", cli.command.name()),
            None => format!("{}.{ext}", cli.command.name()),
        };
        weakcalc::io::write_atomic(&cli.out.join(&name), body.as_bytes())?;
        outputs.push(name);
    }
    let manifest = RunManifest::new(cli, &cfg, outputs, started.elapsed().as_secs_f64());
    manifest.write(&cli.out)?;
    Ok(manifest)
}
