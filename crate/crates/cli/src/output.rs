use std::fs;
use std::hash::{BuildHasher, Hasher};
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::Common;

pub const VERSION: &str = concat!("semcc ", env!("CARGO_PKG_VERSION"));

/// Output document: the resolved parameters next to the result.
#[derive(Serialize)]
pub struct Envelope<'a, S: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub command: &'a str,
    pub spec: &'a S,
    pub result: &'a R,
}

pub fn envelope_json<S: Serialize, R: Serialize>(command: &str, spec: &S, result: &R) -> Result<String> {
    let doc = Envelope { tool: VERSION, command, spec, result };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Parameters of a previous run: the `spec` field of an output document, or the
/// document itself.
pub fn spec_value(text: &str, path: &Path) -> Result<Value> {
    let v: Value = serde_json::from_str(text).map_err(semcc::Error::from).with_context(|| format!("parsing {}", path.display()))?;
    Ok(match v {
        Value::Object(mut m) if m.contains_key("spec") => m.remove("spec").expect("checked"),
        other => other,
    })
}

/// Writes the document to `--out` (printing `summary` to stdout) or to stdout (summary to stderr).
pub fn emit(common: &Common, document: &str, summary: &str) -> Result<()> {
    match &common.out {
        Some(path) => {
            fs::write(path, document).with_context(|| format!("writing {}", path.display()))?;
            print!("{summary}");
        }
        None => {
            std::io::stdout().write_all(document.as_bytes())?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

/// Seed for a randomized command: explicit, or freshly drawn under `--ephemeral`.
pub fn require_seed(explicit: Option<u64>, common: &Common) -> Result<u64> {
    match (explicit, common.ephemeral) {
        (Some(s), _) => Ok(s),
        (None, true) => {
            let mut h = std::collections::hash_map::RandomState::new().build_hasher();
            h.write_u128(std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH)?.as_nanos());
            Ok(h.finish())
        }
        (None, false) => bail!(semcc::Error::Config(
            "this command is randomized: pass --seed <u64>, or --ephemeral to draw and record a fresh seed".into()
        )),
    }
}

/// `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Parses a builtin channel, accepting `mpsk:M` when the snr comes from `--snr-db`.
pub fn channel_arg(text: &str, snr_db: Option<f64>) -> Result<semcc::channels::ChannelSpec> {
    use semcc::channels::ChannelSpec;
    let parts: Vec<&str> = text.split(':').collect();
    let spec = match (parts.as_slice(), snr_db) {
        (["mpsk", m], Some(db)) => ChannelSpec::Mpsk {
            order: m.parse().map_err(|_| semcc::Error::Config(format!("bad PSK order in {text:?}")))?,
            snr: db_to_linear(db),
        },
        (["mpsk", _, _], Some(_)) => bail!(semcc::Error::Config(
            "give the PSK snr either linearly in the channel string or via --snr-db, not both".into()
        )),
        (_, Some(_)) => bail!(semcc::Error::Config("--snr-db applies to mpsk channels only".into())),
        _ if Path::new(text).exists() => ChannelSpec::Custom(semcc::Dmc::from_json(&read(Path::new(text))?)?),
        _ => text.parse()?,
    };
    Ok(spec)
}

pub fn parse_probs(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| semcc::Error::Config(format!("{t:?} is not a probability")).into()))
        .collect()
}
