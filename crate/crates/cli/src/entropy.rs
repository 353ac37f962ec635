use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use semcc::info::{entropy, ProbVector};
use semcc::semantics::{compression_gain, semantic_distribution, CompressionGain, KnowledgeBase};

use crate::output::{emit, envelope_json, parse_probs, read, spec_value};
use crate::{Common, Failure};

#[derive(Args, Debug)]
pub struct EntropyArgs {
    /// Knowledge-base JSON: {"source", "semantic", "kernel"[x][s]}, optionally with "px".
    #[arg(long, required_unless_present = "config")]
    kb: Option<std::path::PathBuf>,
    /// Source distribution, comma separated (overrides "px" in the file).
    #[arg(long)]
    px: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntropySpec {
    knowledge_base: KnowledgeBase,
    px: Vec<f64>,
}

#[derive(Serialize)]
struct EntropyReport {
    shannon_entropy: f64,
    semantic_entropy: f64,
    semantic_distribution: Vec<(String, f64)>,
    compression_gain: Option<f64>,
    compression_gain_unbounded: bool,
}

fn from_kb_file(args: &EntropyArgs) -> Result<EntropySpec> {
    let path = args.kb.as_ref().expect("clap requires --kb without --config");
    let mut doc: Value = serde_json::from_str(&read(path)?)
        .map_err(semcc::Error::from)
        .with_context(|| format!("parsing {}", path.display()))?;
    let embedded = doc.as_object_mut().and_then(|m| m.remove("px"));
    let kb = KnowledgeBase::from_json(&doc.to_string()).with_context(|| format!("knowledge base {}", path.display()))?;
    let px = match (&args.px, embedded) {
        (Some(text), _) => parse_probs(text)?,
        (None, Some(v)) => serde_json::from_value(v).map_err(semcc::Error::from).context("\"px\" must be a list of numbers")?,
        (None, None) => anyhow::bail!(semcc::Error::Config("no source distribution: add \"px\" to the file or pass --px".into())),
    };
    Ok(EntropySpec { knowledge_base: kb, px })
}

pub fn run(args: EntropyArgs) -> Result<(), Failure> {
    let spec = match &args.common.config {
        Some(path) => {
            let mut spec: EntropySpec = serde_json::from_value(spec_value(&read(path)?, path)?)
                .map_err(semcc::Error::from)
                .with_context(|| format!("entropy spec in {}", path.display()))?;
            if let Some(text) = &args.px {
                spec.px = parse_probs(text)?;
            }
            spec
        }
        None => from_kb_file(&args)?,
    };
    let px = ProbVector::new(spec.knowledge_base.source().to_vec(), spec.px.clone())?;
    let ps = semantic_distribution(&px, &spec.knowledge_base)?;
    let hx = entropy(&px);
    let hs = entropy(&ps);
    let gain = compression_gain(hx, hs)?;
    let report = EntropyReport {
        shannon_entropy: hx,
        semantic_entropy: hs,
        semantic_distribution: ps.labels().iter().cloned().zip(ps.probs().iter().copied()).collect(),
        compression_gain: gain.value(),
        compression_gain_unbounded: gain == CompressionGain::Unbounded,
    };
    let gain_text = match gain {
        CompressionGain::Finite(g) => format!("{g:.6}"),
        CompressionGain::Unbounded => "unbounded".into(),
    };
    let summary = format!(
        "shannon entropy   {hx:.6} bits\nsemantic entropy  {hs:.6} bits\ncompression gain  {gain_text}\n"
    );
    emit(&args.common, &envelope_json("entropy", &spec, &report)?, &summary)?;
    Ok(())
}
