//! Hard-decision M-PSK over complex Gaussian noise, reduced to a DMC.
//!
//! Constellation point `i` sits at phase `2 pi i / M` with energy `snr`; the noise is
//! circular complex Gaussian with total power 1 (variance 1/2 per real dimension). The
//! receiver picks the nearest constellation point, i.e. the angular sector
//! `[2 pi j / M - pi / M, 2 pi j / M + pi / M)` containing the received phase.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::{ChannelRng, StreamTag};
use crate::capacity::Dmc;
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature;

/// Noise/energy convention recorded in every report.
pub const NOISE_CONVENTION: &str = "symbol energy = snr (linear), complex noise total power = 1";

const MIN_MC_SAMPLES: u64 = 10_000;
const SECTOR_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PskEstimation {
    Analytic,
    MonteCarlo {
        samples: u64,
        seed: u64,
        /// Largest acceptable per-entry standard error; exceeding it attaches a warning.
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PskConfig {
    pub order: usize,
    pub snr: f64,
    pub estimation: PskEstimation,
}

impl PskConfig {
    pub fn analytic(order: usize, snr: f64) -> Self {
        PskConfig { order, snr, estimation: PskEstimation::Analytic }
    }

    pub fn monte_carlo(order: usize, snr: f64, samples: u64, seed: u64) -> Self {
        PskConfig { order, snr, estimation: PskEstimation::MonteCarlo { samples, seed, tolerance: None } }
    }

    fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::validation(format!("PSK order must be at least 2, got {}", self.order)));
        }
        if !(self.snr >= 0.0) || !self.snr.is_finite() {
            return Err(Error::validation(format!("snr must be finite and non-negative, got {}", self.snr)));
        }
        if let PskEstimation::MonteCarlo { samples, .. } = self.estimation {
            if samples < MIN_MC_SAMPLES {
                return Err(Error::validation(format!(
                    "Monte Carlo PSK estimation needs at least {MIN_MC_SAMPLES} samples per row, got {samples}"
                )));
            }
        }
        Ok(())
    }
}

/// An M-PSK hard-decision channel with its estimation metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PskChannel {
    pub dmc: Dmc,
    pub config: PskConfig,
    /// Per-entry binomial standard errors (Monte Carlo mode only).
    pub std_errors: Option<Vec<Vec<f64>>>,
    pub warnings: Vec<String>,
    pub convention: &'static str,
}

/// Density of the received phase offset `phi` for a point at phase 0 with energy `snr`
/// and unit-power circular noise.
fn phase_density(phi: f64, snr: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let root = snr.sqrt();
    let base = (-snr).exp() / TAU;
    let lobe = root * c / (2.0 * PI.sqrt()) * (-snr * s * s).exp() * (1.0 + statrs::function::erf::erf(root * c));
    base + lobe
}

/// Probabilities that a point sent at phase 0 is detected in each of the `order` sectors.
pub fn sector_probabilities(order: usize, snr: f64) -> Result<Vec<f64>> {
    let half = PI / order as f64;
    let width = 1.0 / (2.0 * snr).sqrt().max(1e-3);
    let peak_breaks: Vec<f64> = (-12..=12).map(|k| k as f64 * width).collect();
    let mut probs = Vec::with_capacity(order);
    for j in 0..order {
        let centre = TAU * j as f64 / order as f64;
        // wrap sector centres into (-pi, pi] so the peak at 0 stays interior
        let centre = if centre > PI { centre - TAU } else { centre };
        let r = quadrature::integrate(|phi| phase_density(phi, snr), centre - half, centre + half, &peak_breaks, SECTOR_TOL, 50_000)?;
        probs.push(r.value.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    Ok(probs.into_iter().map(|p| p / total).collect())
}

fn circulant(row0: &[f64]) -> Vec<Vec<f64>> {
    let m = row0.len();
    (0..m).map(|i| (0..m).map(|j| row0[(j + m - i) % m]).collect()).collect()
}

fn labels(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("psk{i}")).collect()
}

/// Builds the hard-decision DMC for the configuration.
///
/// Analytic mode integrates the received-phase density over each sector and is exactly
/// circulant. Monte Carlo mode simulates every row independently (stream per row) and is
/// circulant only within sampling error.
pub fn mpsk_hard_dmc(cfg: &PskConfig) -> Result<PskChannel> {
    cfg.validate()?;
    let m = cfg.order;
    match cfg.estimation {
        PskEstimation::Analytic => {
            let row0 = sector_probabilities(m, cfg.snr)?;
            Ok(PskChannel {
                dmc: Dmc::new(labels(m), labels(m), circulant(&row0))?,
                config: *cfg,
                std_errors: None,
                warnings: Vec::new(),
                convention: NOISE_CONVENTION,
            })
        }
        PskEstimation::MonteCarlo { samples, seed, tolerance } => {
            let amp = cfg.snr.sqrt();
            let sigma = std::f64::consts::FRAC_1_SQRT_2;
            let counts: Vec<Vec<u64>> = par::map_indexed(m, |i| {
                let mut rng = ChannelRng::for_item(seed, StreamTag::Psk, 0, i as u32);
                let theta = TAU * i as f64 / m as f64;
                let (tx_s, tx_c) = theta.sin_cos();
                let mut row = vec![0u64; m];
                for _ in 0..samples {
                    let nr: f64 = rng.sample(StandardNormal);
                    let ni: f64 = rng.sample(StandardNormal);
                    let re = amp * tx_c + sigma * nr;
                    let im = amp * tx_s + sigma * ni;
                    let sector = (im.atan2(re) * m as f64 / TAU).round() as i64;
                    row[sector.rem_euclid(m as i64) as usize] += 1;
                }
                row
            });
            let n = samples as f64;
            let matrix: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().map(|&c| c as f64 / n).collect()).collect();
            let std_errors: Vec<Vec<f64>> =
                matrix.iter().map(|r| r.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect()).collect();
            let mut warnings = Vec::new();
            let worst = std_errors.iter().flatten().copied().fold(0.0, f64::max);
            if let Some(tol) = tolerance {
                if worst > tol {
                    warnings.push(format!(
                        "largest entry standard error {worst:.3e} exceeds requested tolerance {tol:.3e}; increase samples"
                    ));
                }
            }
            let dmc = Dmc::new(labels(m), labels(m), matrix)?;
            warnings.extend(dmc.warnings());
            Ok(PskChannel { dmc, config: *cfg, std_errors: Some(std_errors), warnings, convention: NOISE_CONVENTION })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::blahut_arimoto;

    #[test]
    fn phase_density_integrates_to_one() {
        for snr in [0.0, 0.5, 4.0, 63.0, 1e4] {
            let total: f64 = sector_probabilities(4, snr).unwrap().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let raw = quadrature::integrate(|p| phase_density(p, snr), -PI, PI, &[0.0], 1e-12, 50_000).unwrap();
            assert!((raw.value - 1.0).abs() < 1e-10, "snr {snr}: {}", raw.value);
        }
    }

    #[test]
    fn bpsk_matches_gaussian_tail() {
        let snr: f64 = 4.0;
        let q = 0.5 * statrs::function::erf::erfc(snr.sqrt());
        let ch = mpsk_hard_dmc(&PskConfig::analytic(2, snr)).unwrap();
        assert!((ch.dmc.prob(0, 1) - q).abs() < 1e-12);
        assert!((ch.dmc.prob(1, 0) - q).abs() < 1e-12);
    }

    #[test]
    fn zero_snr_gives_uniform_rows() {
        let ch = mpsk_hard_dmc(&PskConfig::analytic(5, 0.0)).unwrap();
        assert!(ch.dmc.matrix().iter().flatten().all(|&p| (p - 0.2).abs() < 1e-12));
        let mc = mpsk_hard_dmc(&PskConfig::monte_carlo(4, 0.0, 100_000, 3)).unwrap();
        assert!(mc.dmc.matrix().iter().flatten().all(|&p| (p - 0.25).abs() < 0.006));
    }

    #[test]
    fn high_snr_is_nearly_identity() {
        let ch = mpsk_hard_dmc(&PskConfig::analytic(4, 1e4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ch.dmc.prob(i, j) - target).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn analytic_matrix_is_circulant() {
        let ch = mpsk_hard_dmc(&PskConfig::analytic(6, 3.0)).unwrap();
        let m = ch.dmc.matrix();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(m[i][j], m[0][(j + 6 - i) % 6]);
            }
        }
    }

    #[test]
    fn capacity_nondecreasing_in_snr() {
        let mut prev = 0.0;
        for k in 0..10 {
            let snr = 0.25 * 2f64.powi(k);
            let ch = mpsk_hard_dmc(&PskConfig::analytic(8, snr)).unwrap();
            let c = blahut_arimoto(&ch.dmc, 1e-10, 100_000).unwrap().capacity;
            assert!(c >= prev - 1e-9, "snr {snr}: {c} < {prev}");
            prev = c;
        }
    }

    #[test]
    fn monte_carlo_validation_and_warnings() {
        assert!(mpsk_hard_dmc(&PskConfig::monte_carlo(4, 1.0, 100, 1)).is_err());
        assert!(mpsk_hard_dmc(&PskConfig::analytic(1, 1.0)).is_err());
        assert!(mpsk_hard_dmc(&PskConfig::analytic(4, -1.0)).is_err());
        let cfg = PskConfig {
            order: 4,
            snr: 1.0,
            estimation: PskEstimation::MonteCarlo { samples: 10_000, seed: 1, tolerance: Some(1e-6) },
        };
        let ch = mpsk_hard_dmc(&cfg).unwrap();
        assert!(!ch.warnings.is_empty());
    }
}
