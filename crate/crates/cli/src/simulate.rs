use anyhow::{Context, Result};
use clap::Args;
use serde::de::DeserializeOwned;

use semcc::channels::PskEstimation;
use semcc::coding::{run_sweep, DecoderKind, ExperimentConfig, InputChoice, PartitionScheme};

use crate::output::{channel_arg, emit, envelope_json, parse_probs, read, require_seed, VERSION};
use crate::{Common, Failure};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// bsc:p, z:p, identity:k, mpsk:M:snr (linear), mpsk:M with --snr-db, or a channel JSON file.
    #[arg(long, required_unless_present = "config")]
    channel: Option<String>,
    /// PSK snr in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Blocklengths, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "config")]
    n_grid: Option<Vec<usize>>,
    /// Rate as a fraction of the semantic capacity.
    #[arg(long, conflicts_with = "rate")]
    rate_fraction: Option<f64>,
    /// Absolute rate in bits per channel use.
    #[arg(long)]
    rate: Option<f64>,
    /// Fraction of message bits carrying meaning.
    #[arg(long, required_unless_present = "config")]
    alpha: Option<f64>,
    /// Monte Carlo trials per grid point.
    #[arg(long, required_unless_present = "config")]
    trials: Option<u64>,
    /// ml or typicality:<eps>.
    #[arg(long)]
    decoder: Option<DecoderKind>,
    /// contiguous, interleaved or seeded-random:<seed>.
    #[arg(long)]
    scheme: Option<PartitionScheme>,
    /// fresh or fixed.
    #[arg(long)]
    codebook: Option<String>,
    /// auto, explicit or ensemble.
    #[arg(long)]
    engine: Option<String>,
    /// per-class or full-codebook.
    #[arg(long)]
    regime: Option<String>,
    /// capacity-achieving, uniform, or comma-separated probabilities.
    #[arg(long)]
    input: Option<String>,
    /// Estimate PSK transition probabilities by Monte Carlo with this many samples per row.
    #[arg(long)]
    psk_samples: Option<u64>,
    /// csv or json. Defaults to json when --out ends in .json, csv otherwise.
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn keyword<T: DeserializeOwned>(flag: &str, text: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(text.to_string()))
        .map_err(|_| semcc::Error::Config(format!("--{flag}: unrecognized value {text:?}")).into())
}

fn input_choice(text: &str) -> Result<InputChoice> {
    match text {
        "capacity-achieving" => Ok(InputChoice::CapacityAchieving),
        "uniform" => Ok(InputChoice::Uniform),
        probs => Ok(InputChoice::Probs(parse_probs(probs)?)),
    }
}

fn resolve(args: &SimulateArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.common.config {
        Some(path) => {
            let text = read(path)?;
            let text = match serde_json::from_str::<serde_json::Value>(&text) {
                Ok(serde_json::Value::Object(m)) if m.contains_key("spec") => m["spec"].to_string(),
                _ => text,
            };
            ExperimentConfig::from_document(&text).with_context(|| format!("experiment spec in {}", path.display()))?
        }
        None => ExperimentConfig {
            channel: channel_arg(args.channel.as_deref().expect("clap requires --channel"), args.snr_db)?,
            n_grid: args.n_grid.clone().expect("clap requires --n-grid"),
            rate_fraction: args.rate_fraction.or(if args.rate.is_none() { Some(0.9) } else { None }),
            rate: args.rate,
            alpha: args.alpha.expect("clap requires --alpha"),
            partition_scheme: PartitionScheme::Contiguous,
            decoder: DecoderKind::Ml,
            trials: args.trials.expect("clap requires --trials"),
            seed: require_seed(args.common.seed, &args.common)?,
            codebook: Default::default(),
            engine: Default::default(),
            regime: Default::default(),
            input: Default::default(),
            psk_estimation: PskEstimation::Analytic,
        },
    };
    if args.common.config.is_some() {
        if let Some(c) = &args.channel {
            cfg.channel = channel_arg(c, args.snr_db)?;
        }
        if let Some(g) = &args.n_grid {
            cfg.n_grid = g.clone();
        }
        if args.rate_fraction.is_some() || args.rate.is_some() {
            cfg.rate_fraction = args.rate_fraction;
            cfg.rate = args.rate;
        }
        if let Some(a) = args.alpha {
            cfg.alpha = a;
        }
        if let Some(t) = args.trials {
            cfg.trials = t;
        }
        if let Some(s) = args.common.seed {
            cfg.seed = s;
        }
    }
    if let Some(d) = args.decoder {
        cfg.decoder = d;
    }
    if let Some(s) = args.scheme {
        cfg.partition_scheme = s;
    }
    if let Some(c) = &args.codebook {
        cfg.codebook = keyword("codebook", c)?;
    }
    if let Some(e) = &args.engine {
        cfg.engine = keyword("engine", e)?;
    }
    if let Some(r) = &args.regime {
        cfg.regime = keyword("regime", r)?;
    }
    if let Some(i) = &args.input {
        cfg.input = input_choice(i)?;
    }
    if let Some(samples) = args.psk_samples {
        cfg.psk_estimation = PskEstimation::MonteCarlo { samples, seed: cfg.seed, tolerance: None };
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = resolve(&args)?;
    let report = run_sweep(&cfg)?;
    let format = args.format.clone().unwrap_or_else(|| {
        let json = args.common.out.as_ref().and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if json { "json" } else { "csv" }.to_string()
    });
    let document = match format.as_str() {
        "csv" => report.to_csv(VERSION),
        "json" => envelope_json("simulate", &cfg, &report)?,
        other => return Err(anyhow::Error::new(semcc::Error::Config(format!("--format: expected csv or json, got {other:?}"))).into()),
    };
    let mut summary = format!(
        "C = {:.6}, C_s = {:.6}, R = {:.6} (alpha {}, seed {})\n{:>6}  {:>10}  {:>23}  {:>10}\n",
        report.capacity, report.semantic_capacity, report.rate, cfg.alpha, cfg.seed, "n", "p_sem", "95% interval", "p_msg"
    );
    for row in &report.rows {
        let r = &row.report;
        summary += &format!(
            "{:>6}  {:>10.6}  [{:>9.6}, {:>9.6}]  {:>10.6}\n",
            row.n, r.p_sem.estimate, r.p_sem.lo, r.p_sem.hi, r.p_msg.estimate
        );
    }
    emit(&args.common, &document, &summary)?;
    Ok(())
}
