use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when taking ceilings of `n R` and `alpha n R`, so that products such as
/// `3 * (4/3)` that land a few ulps above an integer are not rounded up.
const CEIL_SLACK: f64 = 1e-9;

pub(crate) fn ceil_bits(x: f64) -> u32 {
    (x - CEIL_SLACK).ceil().max(0.0) as u32
}

/// Blocklength, message rate and semantic fraction of a many-to-one code.
///
/// The message set has `2^ceil(nR)` elements and the semantic message set
/// `2^ceil(alpha nR)`; the realized rates implied by the ceilings are exposed alongside the
/// requested ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeConfig {
    pub n: usize,
    pub rate: f64,
    pub alpha: f64,
}

impl CodeConfig {
    pub fn new(n: usize, rate: f64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("blocklength n must be at least 1"));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::config(format!("rate must be positive, got {rate}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        let cfg = CodeConfig { n, rate, alpha };
        if cfg.message_bits() > 1000 {
            return Err(Error::config(format!("ceil(nR) = {} bits is beyond the supported range", cfg.message_bits())));
        }
        Ok(cfg)
    }

    /// Config whose message set has exactly `2^message_bits` elements and
    /// `2^semantic_bits` semantic classes.
    pub fn from_bits(n: usize, message_bits: u32, semantic_bits: u32) -> Result<Self> {
        if message_bits == 0 || semantic_bits > message_bits {
            return Err(Error::config(format!(
                "need 0 < semantic bits <= message bits, got {semantic_bits} and {message_bits}"
            )));
        }
        let cfg = Self::new(n, message_bits as f64 / n as f64, semantic_bits as f64 / message_bits as f64)?;
        debug_assert_eq!((cfg.message_bits(), cfg.semantic_bits()), (message_bits, semantic_bits));
        Ok(cfg)
    }

    /// `ceil(nR)`.
    pub fn message_bits(&self) -> u32 {
        ceil_bits(self.n as f64 * self.rate)
    }

    /// `ceil(alpha nR)`.
    pub fn semantic_bits(&self) -> u32 {
        ceil_bits(self.alpha * self.n as f64 * self.rate)
    }

    /// Bits of within-class uncertainty: `log2` of the class size.
    pub fn class_bits(&self) -> u32 {
        self.message_bits() - self.semantic_bits()
    }

    pub fn message_count(&self) -> Result<u64> {
        count(self.message_bits())
    }

    pub fn semantic_count(&self) -> Result<u64> {
        count(self.semantic_bits())
    }

    /// `ceil(nR) / n`.
    pub fn realized_rate(&self) -> f64 {
        self.message_bits() as f64 / self.n as f64
    }

    /// `ceil(alpha nR) / ceil(nR)`.
    pub fn realized_alpha(&self) -> f64 {
        self.semantic_bits() as f64 / self.message_bits() as f64
    }

    /// `ceil(alpha nR) / n`, the rate of the per-class codebook.
    pub fn semantic_rate(&self) -> f64 {
        self.semantic_bits() as f64 / self.n as f64
    }
}

fn count(bits: u32) -> Result<u64> {
    if bits > 62 {
        return Err(Error::config(format!("2^{bits} elements cannot be enumerated")));
    }
    Ok(1u64 << bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceilings() {
        let c = CodeConfig::new(3, 4.0 / 3.0, 0.5).unwrap();
        assert_eq!((c.message_bits(), c.semantic_bits()), (4, 2));
        let c = CodeConfig::new(10, 0.25, 0.5).unwrap();
        // nR = 2.5 -> 3, alpha nR = 1.25 -> 2
        assert_eq!((c.message_bits(), c.semantic_bits()), (3, 2));
        assert_eq!(c.message_count().unwrap(), 8);
        assert_eq!(c.semantic_count().unwrap(), 4);
        assert!((c.realized_rate() - 0.3).abs() < 1e-15);
        assert!(c.message_count().unwrap() >= c.semantic_count().unwrap());
    }

    #[test]
    fn from_bits_round_trips() {
        for n in 1..=6 {
            for k in 1..=8u32 {
                for j in 0..=k {
                    let c = CodeConfig::from_bits(n, k, j.max(1).min(k)).unwrap();
                    assert_eq!(c.message_bits(), k);
                    assert_eq!(c.semantic_bits(), j.max(1).min(k));
                }
            }
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(CodeConfig::new(0, 1.0, 0.5).is_err());
        assert!(CodeConfig::new(4, 0.0, 0.5).is_err());
        assert!(CodeConfig::new(4, 1.0, 0.0).is_err());
        assert!(CodeConfig::new(4, 1.0, 1.5).is_err());
        assert!(CodeConfig::new(100, 80.0, 1.0).is_err());
        assert!(CodeConfig::new(100, 0.7, 1.0).unwrap().message_count().is_err());
    }
}
