//! Command line, config file and the resolved [`BenchSpec`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use pimhe::bfv::SecurityLevel;
use pimhe::pimsim::PimConfig;
use pimhe::workloads::{Encoding, Reduction, WeightMode};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "PIMHE_CONFIG";

pub const ADD_SWEEP: [usize; 5] = [20_480, 40_960, 81_920, 163_840, 327_680];
pub const MUL_SWEEP: [usize; 5] = [5_120, 10_240, 20_480, 40_960, 81_920];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MicrobenchAdd,
    MicrobenchMul,
    WorkloadMean,
    WorkloadVariance,
    WorkloadLinreg,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::MicrobenchAdd => "microbench-add",
            Self::MicrobenchMul => "microbench-mul",
            Self::WorkloadMean => "workload-mean",
            Self::WorkloadVariance => "workload-variance",
            Self::WorkloadLinreg => "workload-linreg",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags as typed. Every field is optional so a config file can fill it.
#[derive(Parser, Debug, Default, Clone)]
#[command(
    name = "pimhe",
    version,
    about = "BFV kernels and statistical workloads on a simulated PIM system"
)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Coefficient bits: 27, 54 or 109.
    #[arg(long)]
    pub security: Option<u32>,
    /// Comma-separated item counts for microbenchmarks.
    #[arg(long, value_delimiter = ',')]
    pub items: Vec<usize>,
    #[arg(long)]
    pub users: Option<usize>,
    /// Regression samples per user.
    #[arg(long)]
    pub cts_per_user: Option<usize>,
    #[arg(long)]
    pub tasklets: Option<usize>,
    #[arg(long)]
    pub cores: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Price every run with the cost model without executing kernels.
    #[arg(long)]
    pub cost_only: bool,
    /// JSON config; falls back to $PIMHE_CONFIG.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub plain_modulus: Option<u64>,
    /// bank-local or full-tree.
    #[arg(long)]
    pub reduction: Option<String>,
    /// scalar or packed (mean only).
    #[arg(long)]
    pub encoding: Option<String>,
    /// encrypted or plain (regression only).
    #[arg(long)]
    pub weights: Option<String>,
    /// CSV dataset for workloads, one row per user (per sample for
    /// regression); synthetic data when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

/// Config file contents. Flags given on the command line win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<Mode>,
    pub security: Option<u32>,
    pub items: Option<Vec<usize>>,
    pub users: Option<usize>,
    pub cts_per_user: Option<usize>,
    pub seed: Option<u64>,
    pub cost_only: Option<bool>,
    pub format: Option<Format>,
    pub plain_modulus: Option<u64>,
    pub reduction: Option<Reduction>,
    pub encoding: Option<Encoding>,
    pub weights: Option<WeightMode>,
    pub data: Option<PathBuf>,
    pub pim: Option<PimConfig>,
}

impl FileConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| BenchError::usage("--config", format!("{}: {e}", path.display())))
    }
}

/// A fully resolved invocation; embedded verbatim in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSpec {
    pub mode: Mode,
    pub security: u32,
    pub items: Vec<usize>,
    pub users: usize,
    pub cts_per_user: usize,
    pub seed: u64,
    pub cost_only: bool,
    pub plain_modulus: Option<u64>,
    pub reduction: Reduction,
    pub encoding: Encoding,
    pub weights: WeightMode,
    pub data: Option<PathBuf>,
    pub pim: PimConfig,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn parse_flag<T: std::str::FromStr>(field: &str, v: Option<String>) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    v.map(|s| s.parse().map_err(|e| BenchError::usage(field, e)))
        .transpose()
}

fn positive(field: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(BenchError::usage(field, "must be positive"));
    }
    Ok(v)
}

impl BenchSpec {
    /// CLI over config file over defaults. `env_config` is the value of
    /// [`CONFIG_ENV`], consulted only without `--config`.
    pub fn resolve(cli: Cli, env_config: Option<OsString>) -> Result<Self> {
        let path = cli.config.clone().or(env_config.map(PathBuf::from));
        let file = match path {
            Some(p) => FileConfig::from_path(&p)?,
            None => FileConfig::default(),
        };

        let mode = cli
            .mode
            .or(file.mode)
            .ok_or_else(|| BenchError::usage("--mode", "required"))?;
        let security = cli.security.or(file.security).unwrap_or(27);
        SecurityLevel::from_bits(security).map_err(|e| BenchError::usage("--security", e))?;

        let mut items = if cli.items.is_empty() {
            file.items.unwrap_or_default()
        } else {
            cli.items
        };
        if items.is_empty() {
            items = match mode {
                Mode::MicrobenchMul => MUL_SWEEP.to_vec(),
                _ => ADD_SWEEP.to_vec(),
            };
        }
        for &i in &items {
            positive("--items", i)?;
        }

        let mut pim = file.pim.unwrap_or_default();
        if let Some(t) = cli.tasklets {
            pim.tasklets = positive("--tasklets", t)?;
        }
        if let Some(c) = cli.cores {
            pim.num_cores = positive("--cores", c)?;
        }
        pim.validate()
            .map_err(|e| BenchError::usage("pim config", e))?;

        Ok(Self {
            mode,
            security,
            items,
            users: positive("--users", cli.users.or(file.users).unwrap_or(640))?,
            cts_per_user: positive(
                "--cts-per-user",
                cli.cts_per_user.or(file.cts_per_user).unwrap_or(32),
            )?,
            seed: cli.seed.or(file.seed).unwrap_or(1),
            cost_only: cli.cost_only || file.cost_only.unwrap_or(false),
            plain_modulus: cli.plain_modulus.or(file.plain_modulus),
            reduction: parse_flag("--reduction", cli.reduction)?
                .or(file.reduction)
                .unwrap_or_default(),
            encoding: parse_flag("--encoding", cli.encoding)?
                .or(file.encoding)
                .unwrap_or_default(),
            weights: parse_flag("--weights", cli.weights)?
                .or(file.weights)
                .unwrap_or_default(),
            data: cli.data.or(file.data),
            pim,
            format: cli.format.or(file.format).unwrap_or_default(),
            out: cli.out,
        })
    }

    pub fn level(&self) -> SecurityLevel {
        SecurityLevel::from_bits(self.security).expect("validated on resolve")
    }
}
