//! Binomial proportion estimates.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A binomial proportion estimate with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn wilson(successes: u64, trials: u64) -> Self {
        assert!(successes <= trials, "successes exceed trials");
        if trials == 0 {
            return Proportion { successes, trials, estimate: 0.0, lo: 0.0, hi: 1.0 };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion {
            successes,
            trials,
            estimate: p,
            lo: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
            hi: if successes == trials { 1.0 } else { (centre + half).min(1.0) },
        }
    }

    /// Plug-in binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return f64::INFINITY;
        }
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}
