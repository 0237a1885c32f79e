//! Run configuration from flags, an optional key=value file and the
//! environment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use fsi_core::fem::MaterialParams;

pub const OUT_DIR_ENV: &str = "FSI_OUT_DIR";
pub const MAX_LEVEL: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Resolvent,
    Convergence,
    Infsup,
    Evolve,
    Certify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Resolvent => "resolvent",
            Mode::Convergence => "convergence",
            Mode::Infsup => "infsup",
            Mode::Evolve => "evolve",
            Mode::Certify => "certify",
        }
    }

    fn default_levels(self) -> Vec<u32> {
        match self {
            Mode::Resolvent => vec![0],
            Mode::Convergence | Mode::Infsup => vec![0, 1, 2, 3],
            Mode::Evolve | Mode::Certify => vec![1],
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Mode as ValueEnum>::from_str(s, true)
    }
}

/// Command-line flags; every field is optional so a config file can fill
/// the gaps.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "fsi",
    version,
    allow_negative_numbers = true,
    about = "Stokes / elasticity resolvent solver and studies"
)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Comma-separated mesh levels, e.g. `0,1,2,3`.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    /// Resolvent shift.
    #[arg(long = "lambda")]
    pub lambda: Option<f64>,
    #[arg(long = "lame-lambda")]
    pub lame_lambda: Option<f64>,
    #[arg(long = "mu")]
    pub mu: Option<f64>,
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    #[arg(long = "steps")]
    pub steps: Option<usize>,
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Plain-text `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub levels: Vec<u32>,
    pub params: MaterialParams,
    pub t_final: f64,
    pub n_steps: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

const KEYS: [&str; 9] = [
    "mode",
    "levels",
    "lambda",
    "lame_lambda",
    "mu",
    "t_final",
    "steps",
    "out",
    "seed",
];

/// Parses `key = value` lines; `#` starts a comment, dashes in keys read
/// as underscores.
pub fn parse_config_file(text: &str, path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(usage(format!("{}:{}: unknown key {key:?}", path.display(), n + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse_field<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, UsageError> {
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| usage(format!("config key {key}: cannot parse {v:?}")))
        })
        .transpose()
}

fn parse_levels(s: &str) -> Result<Vec<u32>, UsageError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("levels: cannot parse {t:?}")))
        })
        .collect()
}

impl RunConfig {
    /// Merges flags over the file contents; `env_out` is the value of
    /// `FSI_OUT_DIR`, if set.
    pub fn resolve(cli: &Cli, file: &BTreeMap<String, String>, env_out: Option<PathBuf>) -> Result<Self, UsageError> {
        let mode = match cli.mode {
            Some(m) => m,
            None => parse_field::<Mode>(file, "mode")?.ok_or_else(|| usage("--mode is required"))?,
        };
        let levels = match &cli.levels {
            Some(l) => l.clone(),
            None => match file.get("levels") {
                Some(s) => parse_levels(s)?,
                None => mode.default_levels(),
            },
        };
        let pick = |flag: Option<f64>, key: &str| -> Result<Option<f64>, UsageError> {
            Ok(flag.or(parse_field::<f64>(file, key)?))
        };
        let shift = pick(cli.lambda, "lambda")?.unwrap_or(1.0);
        let lame_lambda = pick(cli.lame_lambda, "lame_lambda")?.unwrap_or(1.0);
        let lame_mu = pick(cli.mu, "mu")?.unwrap_or(1.0);
        let t_final = pick(cli.t_final, "t_final")?;
        let steps = cli.steps.or(parse_field::<usize>(file, "steps")?);
        let seed = cli.seed.or(parse_field::<u64>(file, "seed")?).unwrap_or(0);
        let out_dir = cli
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from))
            .or(env_out)
            .unwrap_or_else(|| PathBuf::from("out"));

        if mode != Mode::Evolve && (t_final.is_some() || steps.is_some()) {
            return Err(usage(format!(
                "--t-final and --steps only apply to --mode evolve, not {}",
                mode.name()
            )));
        }
        let t_final = t_final.unwrap_or(1.0);
        let n_steps = steps.unwrap_or(100);
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(usage(format!("--t-final must be > 0, got {t_final}")));
        }
        if n_steps == 0 {
            return Err(usage("--steps must be at least 1"));
        }
        if !(shift.is_finite() && shift > 0.0) {
            return Err(usage(format!("--lambda must be > 0, got {shift}")));
        }
        let params = MaterialParams::new(lame_lambda, lame_mu, shift).map_err(|e| usage(e.to_string()))?;
        if levels.is_empty() {
            return Err(usage("--levels must not be empty"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage(format!("--levels must be strictly ascending, got {levels:?}")));
        }
        if let Some(&l) = levels.iter().find(|&&l| l > MAX_LEVEL) {
            return Err(usage(format!("--levels: level {l} exceeds the maximum {MAX_LEVEL}")));
        }
        if matches!(mode, Mode::Evolve | Mode::Certify) && levels.len() != 1 {
            return Err(usage(format!(
                "--mode {} takes exactly one level, got {levels:?}",
                mode.name()
            )));
        }
        Ok(RunConfig {
            mode,
            levels,
            params,
            t_final,
            n_steps,
            out_dir,
            seed,
        })
    }
}
