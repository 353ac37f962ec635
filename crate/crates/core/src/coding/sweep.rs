use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::CodeConfig;
use super::decode::DecoderKind;
use super::partition::{make_partition, PartitionScheme};
use super::simulate::{simulate, simulate_full_codebook, CodebookMode, Engine, Regime, SimOptions, SimulationReport};
use crate::capacity::{blahut_arimoto, semantic_capacity_from, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::channels::{ChannelSpec, PskEstimation};
use crate::error::{Error, Result};
use crate::info::ProbVector;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: &str =
    "n,R,alpha,message_bits,semantic_bits,trials,semantic_errors,message_errors,p_sem,p_sem_lo,p_sem_hi,p_msg,p_msg_lo,p_msg_hi,seed,engine";

const CONFIG_PREFIX: &str = "# config: ";

/// Input distribution used to draw codewords.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputChoice {
    /// The Blahut–Arimoto optimizer of the channel.
    #[default]
    CapacityAchieving,
    Uniform,
    Probs(Vec<f64>),
}

/// A rate sweep over blocklengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelSpec,
    pub n_grid: Vec<usize>,
    /// Rate as a fraction of the semantic capacity `C / alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_fraction: Option<f64>,
    /// Absolute message rate in bits per channel use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub alpha: f64,
    #[serde(default = "default_scheme")]
    pub partition_scheme: PartitionScheme,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderKind,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub codebook: CodebookMode,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub regime: Regime,
    #[serde(default)]
    pub input: InputChoice,
    #[serde(default = "default_psk")]
    pub psk_estimation: PskEstimation,
}

fn default_scheme() -> PartitionScheme {
    PartitionScheme::Contiguous
}

fn default_decoder() -> DecoderKind {
    DecoderKind::Ml
}

fn default_psk() -> PskEstimation {
    PskEstimation::Analytic
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config from a config document, a JSON report embedding one under
    /// `"config"`, or a CSV produced by [`SweepReport::to_csv`].
    pub fn from_document(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('#') {
            let line = text
                .lines()
                .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
                .ok_or_else(|| Error::config("CSV header carries no embedded config line"))?;
            return Self::from_json(line);
        }
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("config") {
            Some(inner) => Self::from_json(&inner.to_string()),
            None => Self::from_json(text),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::config("n_grid must list positive blocklengths"));
        }
        if self.n_grid.len() > u16::MAX as usize {
            return Err(Error::config("n_grid is too long"));
        }
        match (self.rate_fraction, self.rate) {
            (Some(f), None) if f > 0.0 && f.is_finite() => {}
            (None, Some(r)) if r > 0.0 && r.is_finite() => {}
            (Some(_), Some(_)) => return Err(Error::config("give either rate_fraction or rate, not both")),
            _ => return Err(Error::config("a positive rate_fraction or rate is required")),
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub rate: f64,
    pub report: SimulationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub capacity: f64,
    pub semantic_capacity: f64,
    pub rate: f64,
    pub input: Vec<f64>,
    pub warnings: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// CSV with `#` comment lines carrying the schema, tool version and resolved config,
    /// followed by one data row per blocklength.
    pub fn to_csv(&self, tool_version: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# semcc sweep");
        let _ = writeln!(s, "# schema: {}", self.schema);
        let _ = writeln!(s, "# version: {tool_version}");
        let _ = writeln!(s, "{CONFIG_PREFIX}{}", serde_json::to_string(&self.config).expect("config serializes"));
        let _ = writeln!(s, "# capacity: {}", self.capacity);
        let _ = writeln!(s, "# semantic_capacity: {}", self.semantic_capacity);
        for w in &self.warnings {
            let _ = writeln!(s, "# warning: {w}");
        }
        let _ = writeln!(s, "{CSV_COLUMNS}");
        for row in &self.rows {
            let r = &row.report;
            let engine = serde_json::to_value(r.engine).expect("engine serializes");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                row.n,
                row.rate,
                self.config.alpha,
                r.message_bits,
                r.semantic_bits,
                r.trials,
                r.semantic_errors,
                r.message_errors,
                r.p_sem.estimate,
                r.p_sem.lo,
                r.p_sem.hi,
                r.p_msg.estimate,
                r.p_msg.lo,
                r.p_msg.hi,
                r.seed,
                engine.as_str().unwrap_or_default()
            );
        }
        s
    }
}

/// Runs one simulation per blocklength; grid point `i` uses stream group `i`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let ch = cfg.channel.build_with(cfg.psk_estimation)?;
    let cap = blahut_arimoto(&ch, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let c_s = semantic_capacity_from(cap.capacity, cfg.alpha)?;
    let rate = match (cfg.rate, cfg.rate_fraction) {
        (Some(r), _) => r,
        (None, Some(f)) => f * c_s,
        (None, None) => unreachable!("validated"),
    };
    let px = match &cfg.input {
        InputChoice::CapacityAchieving => cap.optimal_input_dist(),
        InputChoice::Uniform => ProbVector::uniform(ch.input_size())?,
        InputChoice::Probs(p) => ProbVector::from_probs(p.clone())?,
    };
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let code = CodeConfig::new(n, rate, cfg.alpha)?;
        let opts = SimOptions { trials: cfg.trials, seed: cfg.seed, decoder: cfg.decoder, codebook: cfg.codebook, engine: cfg.engine, group: i as u16 };
        let report = match cfg.regime {
            Regime::PerClass => simulate(&code, cfg.partition_scheme, &ch, &px, &opts)?,
            Regime::FullCodebook => {
                let partition = make_partition(&code, cfg.partition_scheme)?;
                simulate_full_codebook(&code, &partition, &ch, &px, &opts)?
            }
        };
        rows.push(SweepRow { n, rate, report });
    }
    Ok(SweepReport {
        schema: SCHEMA_VERSION,
        config: cfg.clone(),
        capacity: cap.capacity,
        semantic_capacity: c_s,
        rate,
        input: px.probs().to_vec(),
        warnings: ch.warnings(),
        rows,
    })
}
