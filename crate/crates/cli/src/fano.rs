use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use semcc::coding::{fano_campaign, FanoParams};

use crate::output::{emit, envelope_json, read, require_seed, spec_value};
use crate::{Common, Failure};

#[derive(Args, Debug)]
pub struct FanoArgs {
    /// Number of random instances in the campaign.
    #[arg(long)]
    instances: Option<u32>,
    /// Keep per-instance records in the output.
    #[arg(long)]
    records: bool,
    /// Evaluate the bound at this semantic error probability instead of running a campaign.
    #[arg(long, requires_all = ["n", "rate", "alpha", "beta"])]
    p_es: Option<f64>,
    /// Blocklength.
    #[arg(long)]
    n: Option<usize>,
    /// Rate in bits per channel use.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Fraction of the message set in one semantic class.
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
enum FanoSpec {
    Campaign { instances: u32, seed: u64, records: bool },
    Bound { params: FanoParams, p_es: f64 },
}

#[derive(Serialize)]
struct BoundReport {
    gamma: f64,
    bound: f64,
}

#[derive(Serialize)]
struct CampaignReport {
    instances: usize,
    fano_holds: usize,
    chain_holds: usize,
    worst_fano_slack: f64,
    failures: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    records: Option<Vec<semcc::coding::CampaignRecord>>,
}

pub fn run(args: FanoArgs) -> Result<(), Failure> {
    let spec = match (&args.common.config, args.p_es) {
        (Some(path), _) => {
            let mut spec: FanoSpec = serde_json::from_value(spec_value(&read(path)?, path)?)
                .map_err(semcc::Error::from)
                .with_context(|| format!("fano spec in {}", path.display()))?;
            if let (FanoSpec::Campaign { seed, .. }, Some(s)) = (&mut spec, args.common.seed) {
                *seed = s;
            }
            spec
        }
        (None, Some(p_es)) => FanoSpec::Bound {
            params: FanoParams {
                n: args.n.expect("clap requires --n"),
                rate: args.rate.expect("clap requires --rate"),
                alpha: args.alpha.expect("clap requires --alpha"),
                beta: args.beta.expect("clap requires --beta"),
            },
            p_es,
        },
        (None, None) => FanoSpec::Campaign {
            instances: args.instances.unwrap_or(1000),
            seed: require_seed(args.common.seed, &args.common)?,
            records: args.records,
        },
    };
    match &spec {
        FanoSpec::Bound { params, p_es } => {
            let report = BoundReport { gamma: params.gamma()?, bound: params.bound(*p_es)? };
            let summary = format!("gamma {:.6}\nbound {:.6} bits\n", report.gamma, report.bound);
            emit(&args.common, &envelope_json("fano", &spec, &report)?, &summary)?;
        }
        FanoSpec::Campaign { instances, seed, records } => {
            let c = fano_campaign(*instances, *seed)?;
            let failures =
                c.records.iter().filter(|r| !(r.fano.holds && r.chain.holds)).map(|r| r.index).collect::<Vec<_>>();
            let summary = format!(
                "fano bound holds      {}/{}\nconverse chain holds  {}/{}\nworst slack           {:.3e} bits\n",
                c.fano_holds, c.instances, c.chain_holds, c.instances, c.worst_fano_slack
            );
            let report = CampaignReport {
                instances: c.instances,
                fano_holds: c.fano_holds,
                chain_holds: c.chain_holds,
                worst_fano_slack: c.worst_fano_slack,
                failures,
                records: records.then_some(c.records),
            };
            emit(&args.common, &envelope_json("fano", &spec, &report)?, &summary)?;
        }
    }
    Ok(())
}
