use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use semcc::capacity::{semantic_capacity_from, DEFAULT_MAX_ITER, DEFAULT_TOL};
use semcc::channels::{ChannelSpec, PskEstimation, NOISE_CONVENTION};
use semcc::{blahut_arimoto, CapacityResult};

use crate::output::{channel_arg, emit, envelope_json, read, require_seed, spec_value};
use crate::{Common, Failure};

#[derive(Args, Debug)]
pub struct CapacityArgs {
    /// bsc:p, z:p, identity:k, mpsk:M:snr (linear), mpsk:M with --snr-db, or a channel JSON file.
    #[arg(long, required_unless_present = "config")]
    channel: Option<String>,
    /// PSK snr in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Fraction of message bits carrying meaning.
    #[arg(long)]
    alpha: Option<f64>,
    /// Estimate PSK transition probabilities by Monte Carlo with this many samples per row.
    #[arg(long)]
    psk_samples: Option<u64>,
    /// Stopping gap for Blahut–Arimoto.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap; hitting it exits with status 3.
    #[arg(long)]
    max_iter: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacitySpec {
    channel: ChannelSpec,
    alpha: f64,
    tol: f64,
    max_iter: usize,
    psk_estimation: PskEstimation,
}

#[derive(Serialize)]
struct CapacityReport {
    capacity: f64,
    semantic_capacity: f64,
    optimal_input: Vec<(String, f64)>,
    iterations: usize,
    gap: f64,
    matrix: Vec<Vec<f64>>,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_convention: Option<&'static str>,
}

pub fn run(args: CapacityArgs) -> Result<(), Failure> {
    let mut spec = match &args.common.config {
        Some(path) => serde_json::from_value::<CapacitySpec>(spec_value(&read(path)?, path)?)
            .map_err(semcc::Error::from)
            .with_context(|| format!("capacity spec in {}", path.display()))?,
        None => CapacitySpec {
            channel: channel_arg(args.channel.as_deref().expect("clap requires --channel"), args.snr_db)?,
            alpha: 1.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            psk_estimation: PskEstimation::Analytic,
        },
    };
    if let Some(a) = args.alpha {
        spec.alpha = a;
    }
    if let Some(t) = args.tol {
        spec.tol = t;
    }
    if let Some(m) = args.max_iter {
        spec.max_iter = m;
    }
    if let Some(samples) = args.psk_samples {
        let seed = require_seed(args.common.seed, &args.common)?;
        spec.psk_estimation = PskEstimation::MonteCarlo { samples, seed, tolerance: None };
    } else if let (PskEstimation::MonteCarlo { samples, tolerance, .. }, Some(s)) = (spec.psk_estimation, args.common.seed) {
        spec.psk_estimation = PskEstimation::MonteCarlo { samples, seed: s, tolerance };
    }

    let ch = spec.channel.build_with(spec.psk_estimation)?;
    let cap: CapacityResult = blahut_arimoto(&ch, spec.tol, spec.max_iter)
        .map_err(|e| match e {
            semcc::Error::NotConverged(best) => anyhow::Error::new(semcc::Error::NotConverged(best.clone())).context(format!(
                "best so far: C >= {:.9} bits, gap {:.3e}, input {:?}",
                best.capacity, best.gap, best.optimal_input
            )),
            other => other.into(),
        })?;
    let c_s = semantic_capacity_from(cap.capacity, spec.alpha)?;
    let report = CapacityReport {
        capacity: cap.capacity,
        semantic_capacity: c_s,
        optimal_input: ch.inputs().iter().cloned().zip(cap.optimal_input.iter().copied()).collect(),
        iterations: cap.iterations,
        gap: cap.gap,
        matrix: ch.matrix().to_vec(),
        warnings: ch.warnings(),
        noise_convention: matches!(spec.channel, ChannelSpec::Mpsk { .. }).then_some(NOISE_CONVENTION),
    };
    let summary = format!(
        "capacity           {:.6} bits/use\nsemantic capacity  {:.6} bits/use (alpha {})\niterations         {}\ngap                {:.3e}\n",
        cap.capacity, c_s, spec.alpha, cap.iterations, cap.gap
    );
    emit(&args.common, &envelope_json("capacity", &spec, &report)?, &summary)?;
    Ok(())
}
