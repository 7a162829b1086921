//! Experiment configuration: the parsed command line and the `run --config`
//! TOML file share one schema, so every output can embed the exact config
//! that reproduces it.

use clap::{Args, Subcommand, ValueEnum};
use josephus_core::analysis::CltSampling;
use josephus_core::rule::{ratio, ExactRule, Rule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::format::Format;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn version_string() -> String {
    format!("josephus {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Deterministic,
    R1,
    R2,
    R3,
}

fn rule_from(kind: RuleKind, p: Option<f64>, q: Option<f64>) -> Result<Rule, CliError> {
    let need = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| CliError::Usage(format!("rule {kind:?} needs --{name}")))
    };
    Ok(match kind {
        RuleKind::Deterministic => Rule::Deterministic,
        RuleKind::R1 => Rule::r1(need("p", p)?)?,
        RuleKind::R2 => Rule::r2(need("p", p)?)?,
        RuleKind::R3 => Rule::r3(need("p", p)?, need("q", q)?)?,
    })
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleArgs {
    #[arg(long, value_enum)]
    #[serde(rename = "kind")]
    pub rule: RuleKind,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl RuleArgs {
    pub fn rule(&self) -> Result<Rule, CliError> {
        rule_from(self.rule, self.p, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetArgs {
    /// Single N: prints b_N.
    #[arg(long, conflicts_with_all = ["n_min", "n_max"])]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[arg(long, requires = "n_max")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<u64>,
    #[arg(long, requires = "n_min")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    /// Compares the generating series with b_N up to this degree.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_check: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long)]
    pub n: usize,
    /// Ask for the R2 recursion in its literal printed form (refused: it is
    /// self-referential).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub paper_literal: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub rule: RuleKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_num: Option<i64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_den: Option<i64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_num: Option<i64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_den: Option<i64>,
}

impl OracleArgs {
    pub fn rule(&self) -> Result<ExactRule, CliError> {
        let frac = |name: &str, num: Option<i64>, den: Option<i64>| match (num, den) {
            (Some(a), Some(b)) => Ok(ratio(a, b)?),
            _ => Err(CliError::Usage(format!("rule {:?} needs --{name}-num and --{name}-den", self.rule))),
        };
        Ok(match self.rule {
            RuleKind::Deterministic => ExactRule::Deterministic,
            RuleKind::R1 => ExactRule::r1(frac("p", self.p_num, self.p_den)?)?,
            RuleKind::R2 => ExactRule::r2(frac("p", self.p_num, self.p_den)?)?,
            RuleKind::R3 => ExactRule::r3(
                frac("p", self.p_num, self.p_den)?,
                frac("q", self.q_num, self.q_den)?,
            )?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value_t = 3)]
    pub n_min: usize,
    #[arg(long)]
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayArgs {
    /// Middle-range bound `g <= K beta^<n> / gamma^N` at this p.
    #[arg(long, required_unless_present = "unbiased", conflicts_with = "unbiased")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Unbiased bound `g <= K alpha^(2(1+eps)n - N)`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unbiased: bool,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.03)]
    pub alpha: f64,
    #[arg(long, default_value_t = 500)]
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingArg {
    InverseCdf,
    Simulation,
}

impl From<SamplingArg> for CltSampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::InverseCdf => CltSampling::InverseCdf,
            SamplingArg::Simulation => CltSampling::Simulation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltArgs {
    #[arg(long, default_value_t = 10_000)]
    pub l_max: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = SamplingArg::InverseCdf)]
    pub sampling: SamplingArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FigureKind {
    R1,
    R2,
    R3,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected P:Q")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: FigureKind,
    #[arg(long, default_value_t = crate::figures::FIGURE_N)]
    pub n: usize,
    /// Comma-separated p values (R1, R2).
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p_grid: Vec<f64>,
    /// `P:Q` pairs (R3), comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pq_grid: Vec<(f64, f64)>,
    /// Monte Carlo histograms instead of exact DP.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub montecarlo: bool,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Also write a gnuplot script.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
    pub p_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [500, 1000, 2000])]
    pub n_values: Vec<usize>,
    #[arg(long, default_value_t = crate::figures::SWEEP_DELTA)]
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: std::path::PathBuf,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Classical survivor b_N.
    Det(DetArgs),
    /// Exact survival probabilities by DP.
    Exact(ExactArgs),
    /// Seeded Monte Carlo histogram.
    Simulate(SimulateArgs),
    /// Exhaustive enumeration in exact rationals (small N).
    Oracle(OracleArgs),
    /// Per-N moments, variance, third central moment and eta.
    Moments(MomentsArgs),
    /// Exponential decay bounds with fitted constants.
    Decay(DecayArgs),
    /// Central limit experiment for the unbiased rule.
    Clt(CltArgs),
    /// Survival curves for one rule over a parameter grid.
    Figure(FigureArgs),
    /// Mass near 0 versus near 1/2 across p and N (descriptive).
    Sweep(SweepArgs),
    /// Re-run an experiment from a TOML config.
    #[serde(skip)]
    Run(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Det(_) => "det",
            Command::Exact(_) => "exact",
            Command::Simulate(_) => "simulate",
            Command::Oracle(_) => "oracle",
            Command::Moments(_) => "moments",
            Command::Decay(_) => "decay",
            Command::Clt(_) => "clt",
            Command::Figure(_) => "figure",
            Command::Sweep(_) => "sweep",
            Command::Run(_) => "run",
        }
    }
}

/// Everything that determines an output: command, seed and format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    pub command: Command,
}

impl ExperimentConfig {
    pub fn new(command: Command, seed: u64, format: Format) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            seed,
            format,
            command,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        if matches!(cfg.command, Command::Run(_)) {
            return Err(CliError::Config("a config cannot itself be `run`".into()));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes to JSON")
    }

    /// SHA-256 over the compact JSON of the config followed by the version
    /// string, hex-encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_json().to_string().as_bytes());
        h.update(b"\n");
        h.update(version_string().as_bytes());
        hex(&h.finalize())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
