use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::psk::{mpsk_hard_dmc, PskConfig, PskEstimation};
use crate::capacity::Dmc;
use crate::error::{Error, Result};

/// A channel named in an experiment: a builtin (`bsc:p`, `z:p`, `identity:k`,
/// `mpsk:M:snr`) or an explicit matrix document.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Bsc { p: f64 },
    Z { p: f64 },
    Identity { k: usize },
    /// Hard-decision M-PSK, linear snr, analytic sector probabilities.
    Mpsk { order: usize, snr: f64 },
    Custom(Dmc),
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Dmc> {
        self.build_with(PskEstimation::Analytic)
    }

    /// Builds the channel, using `psk` as the estimation mode for M-PSK builtins.
    pub fn build_with(&self, psk: PskEstimation) -> Result<Dmc> {
        match self {
            ChannelSpec::Bsc { p } => super::bsc(*p),
            ChannelSpec::Z { p } => super::z_channel(*p),
            ChannelSpec::Identity { k } => super::identity(*k),
            ChannelSpec::Mpsk { order, snr } => {
                Ok(mpsk_hard_dmc(&PskConfig { order: *order, snr: *snr, estimation: psk })?.dmc)
            }
            ChannelSpec::Custom(d) => Ok(d.clone()),
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSpec::Bsc { p } => write!(f, "bsc:{p}"),
            ChannelSpec::Z { p } => write!(f, "z:{p}"),
            ChannelSpec::Identity { k } => write!(f, "identity:{k}"),
            ChannelSpec::Mpsk { order, snr } => write!(f, "mpsk:{order}:{snr}"),
            ChannelSpec::Custom(d) => write!(f, "{}", d.to_json()),
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>().map_err(|_| Error::config(format!("channel {s:?}: {t:?} is not a number")))
        };
        let int = |t: &str| -> Result<usize> {
            t.parse::<usize>().map_err(|_| Error::config(format!("channel {s:?}: {t:?} is not a count")))
        };
        match parts.as_slice() {
            ["bsc", p] => Ok(ChannelSpec::Bsc { p: num(p)? }),
            ["z", p] => Ok(ChannelSpec::Z { p: num(p)? }),
            ["identity", k] => Ok(ChannelSpec::Identity { k: int(k)? }),
            ["mpsk", m, snr] => Ok(ChannelSpec::Mpsk { order: int(m)?, snr: num(snr)? }),
            _ => Err(Error::config(format!(
                "unknown channel {s:?}; expected bsc:p, z:p, identity:k, mpsk:M:snr or a matrix document"
            ))),
        }
    }
}

impl Serialize for ChannelSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ChannelSpec::Custom(d) => d.to_json().serialize(serializer),
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for ChannelSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        match v {
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            other => Dmc::from_json(&other.to_string()).map(ChannelSpec::Custom).map_err(serde::de::Error::custom),
        }
    }
}
