use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use toeplitz_lab::bergman::MCParams;
use toeplitz_lab::spectral::Method;

use crate::CliError;

pub const CACHE_ENV: &str = "TOEPLITZ_LAB_CACHE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Unset flags fall back to the config file,
/// then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file with defaults for any of the flags below
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Weight parameter, must exceed n - 1 (default n + 1)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Truncation degree N for operator and Gram computations
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Largest k1 + 2 k2 in eigenvalue tables
    #[arg(long, global = true)]
    pub kmax: Option<u32>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// quad, mc_cone or bergman_mc
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Gram cache directory (falls back to $TOEPLITZ_LAB_CACHE)
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Write results here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Override the variance and dimension guards of the Monte Carlo sampler
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    lambda: Option<f64>,
    degree_max: Option<u32>,
    kmax: Option<u32>,
    samples: Option<usize>,
    seed: Option<u64>,
    method: Option<String>,
    cache_dir: Option<PathBuf>,
    output: Option<Format>,
    force: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub lambda: f64,
    pub degree_max: u32,
    pub kmax: u32,
    pub samples: usize,
    pub seed: u64,
    pub method: Method,
    pub cache_dir: Option<PathBuf>,
    pub output: Format,
    pub force: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// True when `n` came from a flag or the config file rather than the default.
    #[serde(skip)]
    pub n_explicit: bool,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let n_explicit = args.n.is_some() || file.n.is_some();
        let n = args.n.or(file.n).unwrap_or(3);
        if n < 3 {
            return Err(CliError::Config(format!("n must be at least 3 (got {n})")));
        }
        let lambda = args.lambda.or(file.lambda).unwrap_or(n as f64 + 1.0);
        if !lambda.is_finite() || lambda <= n as f64 - 1.0 {
            return Err(CliError::Config(format!("lambda must exceed n - 1 = {} (got {lambda})", n - 1)));
        }
        let samples = args.samples.or(file.samples).unwrap_or(1_000_000);
        if samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        let method = match args.method.as_deref().or(file.method.as_deref()) {
            Some(s) => s.parse().map_err(|e: toeplitz_lab::Error| CliError::Config(e.to_string()))?,
            None => Method::Quad,
        };
        let cache_dir = args
            .cache_dir
            .clone()
            .or(file.cache_dir)
            .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        Ok(Self {
            n,
            lambda,
            degree_max: args.degree.or(file.degree_max).unwrap_or(4),
            kmax: args.kmax.or(file.kmax).unwrap_or(4),
            samples,
            seed: args.seed.or(file.seed).unwrap_or(0),
            method,
            cache_dir,
            output: args.format.or(file.output).unwrap_or(Format::Csv),
            force: args.force || file.force.unwrap_or(false),
            out: args.out.clone(),
            n_explicit,
        })
    }

    pub fn mc_params(&self) -> Result<MCParams, CliError> {
        Ok(MCParams::new(self.n, self.lambda, self.samples, self.seed)?.with_force(self.force))
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
