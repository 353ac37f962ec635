use rand::Rng;
use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use super::decode::DecoderKind;
use super::exact::{exact_evaluate, ExactEvaluation};
use super::partition::{PartitionScheme, SemanticPartition};
use super::simulate::{CodedSystem, Regime};
use crate::capacity::{blahut_arimoto, Dmc};
use crate::channels::{ChannelRng, StreamTag};
use crate::error::{Error, Result};
use crate::info::ProbVector;
use crate::par;

/// Slack allowed on entropy inequalities evaluated from exact enumeration.
pub const ENTROPY_SLACK: f64 = 1e-9;
/// Slack allowed on comparisons against a Blahut–Arimoto capacity.
pub const CAPACITY_SLACK: f64 = 1e-6;

/// Parameters of the semantic Fano bound.
///
/// `beta` is the fraction of the message set taken by a semantic class
/// (`2^-ceil(alpha nR)` for equal classes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoParams {
    pub n: usize,
    pub rate: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl FanoParams {
    pub fn nr(&self) -> f64 {
        self.n as f64 * self.rate
    }

    /// `gamma = log2(1 - beta) / (nR) + 1`.
    pub fn gamma(&self) -> Result<f64> {
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::domain(format!("class fraction beta must lie in [0, 1), got {}", self.beta)));
        }
        if !(self.nr() > 0.0) {
            return Err(Error::domain("nR must be positive"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::domain(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        Ok((1.0 - self.beta).log2() / self.nr() + 1.0)
    }

    /// `1 + (1 - alpha + (gamma + alpha - 1) p_es) nR`.
    pub fn bound(&self, p_es: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p_es) {
            return Err(Error::domain(format!("semantic error probability must lie in [0, 1], got {p_es}")));
        }
        let g = self.gamma()?;
        Ok(1.0 + (1.0 - self.alpha + (g + self.alpha - 1.0) * p_es) * self.nr())
    }
}

pub fn fano_bound(params: &FanoParams, p_es: f64) -> Result<f64> {
    params.bound(p_es)
}

/// A coded system together with the Fano parameters it realizes.
#[derive(Debug, Clone)]
pub struct FanoInstance {
    pub params: FanoParams,
    pub system: CodedSystem,
}

impl FanoInstance {
    /// Reads `nR = log2 |messages|`, `alpha = log2 |classes| / nR` and `beta` (largest class
    /// over the message count) off the system.
    pub fn from_system(system: CodedSystem) -> Result<Self> {
        let messages = system.partition.message_count();
        if messages < 2 {
            return Err(Error::config("a Fano instance needs at least two messages"));
        }
        let nr = (messages as f64).log2();
        let params = FanoParams {
            n: system.codebook.blocklength(),
            rate: nr / system.codebook.blocklength() as f64,
            alpha: (system.partition.class_count() as f64).log2() / nr,
            beta: system.partition.largest_class() as f64 / messages as f64,
        };
        Ok(FanoInstance { params, system })
    }
}

/// Comparison of the exact equivocation against the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FanoCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub p_sem: f64,
    pub gamma: f64,
    pub params: FanoParams,
    pub equal_classes: bool,
    pub p_erasure: f64,
    /// `H(W | E, Y^n)` against `(1 - P) log2(beta |W|) + P log2((1 - beta) |W|)`. Erasures
    /// leave the message anywhere in the set, so this step alone may fail when the decoder
    /// erases; the full bound still holds for `beta <= 1/2`.
    pub conditional_lhs: f64,
    pub conditional_rhs: f64,
    pub conditional_holds: bool,
}

pub fn check_fano(inst: &FanoInstance) -> Result<FanoCheck> {
    check_fano_with(inst, &exact_evaluate(&inst.system)?)
}

pub fn check_fano_with(inst: &FanoInstance, e: &ExactEvaluation) -> Result<FanoCheck> {
    let p = &inst.params;
    let p_sem = e.p_sem.clamp(0.0, 1.0);
    let rhs = p.bound(p_sem)?;
    let lhs = e.h_w_given_y;
    let messages = inst.system.partition.message_count() as f64;
    let conditional_rhs = (1.0 - p_sem) * (p.beta * messages).log2() + p_sem * ((1.0 - p.beta) * messages).log2();
    Ok(FanoCheck {
        holds: lhs <= rhs + ENTROPY_SLACK,
        lhs,
        rhs,
        slack: rhs - lhs,
        p_sem,
        gamma: p.gamma()?,
        params: *p,
        equal_classes: inst.system.partition.has_equal_classes(),
        p_erasure: e.p_erasure,
        conditional_lhs: e.h_w_given_ey,
        conditional_rhs,
        conditional_holds: e.h_w_given_ey <= conditional_rhs + ENTROPY_SLACK,
    })
}

/// The converse chain `nR = H(W) = H(W|Y^n) + I(W;Y^n) <= Fano + I(X^n;Y^n) <= Fano + nC`,
/// every link evaluated exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConverseChain {
    pub h_w: f64,
    pub nr: f64,
    pub h_w_given_y: f64,
    pub mi_w_y: f64,
    pub mi_x_y: f64,
    pub fano_rhs: f64,
    pub capacity: f64,
    /// Certified upper bound on the capacity.
    pub capacity_upper: f64,
    pub n_c: f64,
    pub uniform_prior: bool,
    pub chain_rule: bool,
    pub fano: bool,
    pub data_processing: bool,
    pub memoryless: bool,
    pub rate_bound: bool,
    pub holds: bool,
}

pub fn converse_chain(inst: &FanoInstance) -> Result<ConverseChain> {
    let e = exact_evaluate(&inst.system)?;
    converse_chain_with(inst, &e, &check_fano_with(inst, &e)?)
}

fn converse_chain_with(inst: &FanoInstance, e: &ExactEvaluation, fano: &FanoCheck) -> Result<ConverseChain> {
    let cap = match blahut_arimoto(&inst.system.channel, 1e-12, 1_000_000) {
        Ok(c) => c,
        Err(Error::NotConverged(best)) => *best,
        Err(other) => return Err(other),
    };
    let n = inst.params.n as f64;
    let nr = inst.params.nr();
    let n_c = n * cap.upper_bound();
    let uniform_prior = (e.h_w - nr).abs() <= 1e-12;
    let chain_rule = (e.h_w - (e.h_w_given_y + e.mi_w_y)).abs() <= ENTROPY_SLACK;
    let data_processing = e.mi_w_y <= e.mi_x_y + ENTROPY_SLACK;
    let memoryless = e.mi_x_y <= n_c + CAPACITY_SLACK;
    let rate_bound = nr <= fano.rhs + n_c + CAPACITY_SLACK;
    Ok(ConverseChain {
        h_w: e.h_w,
        nr,
        h_w_given_y: e.h_w_given_y,
        mi_w_y: e.mi_w_y,
        mi_x_y: e.mi_x_y,
        fano_rhs: fano.rhs,
        capacity: cap.capacity,
        capacity_upper: cap.upper_bound(),
        n_c,
        uniform_prior,
        chain_rule,
        fano: fano.holds,
        data_processing,
        memoryless,
        rate_bound,
        holds: uniform_prior && chain_rule && fano.holds && data_processing && memoryless && rate_bound,
    })
}

fn random_dist<R: Rng>(rng: &mut R, k: usize, zero_chance: f64) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..k).map(|_| if rng.random::<f64>() < zero_chance { 0.0 } else { rng.random::<f64>() }).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.into_iter().map(|v| v / total).collect();
        }
    }
}

/// Random small instance: `n <= 4`, binary or ternary alphabets, `2..=16` messages with
/// `2^j` equal classes, per-class or full codebooks, mostly ML decoding. Deterministic in
/// `(seed, index)`.
pub fn random_instance(seed: u64, index: u32) -> Result<FanoInstance> {
    let mut rng = ChannelRng::for_item(seed, StreamTag::Instance, 0, index);
    let n = rng.random_range(1..=4usize);
    let nx = rng.random_range(2..=3usize);
    let ny = rng.random_range(2..=3usize);
    let k = rng.random_range(1..=4u32);
    let j = rng.random_range(1..=k);
    let regime = if rng.random_bool(0.5) { Regime::PerClass } else { Regime::FullCodebook };
    let scheme = match rng.random_range(0..3) {
        0 => PartitionScheme::Contiguous,
        1 => PartitionScheme::Interleaved,
        _ => PartitionScheme::SeededRandom { seed: rng.random() },
    };
    let matrix: Vec<Vec<f64>> = match rng.random_range(0..10) {
        // useless channel
        0 => {
            let row = random_dist(&mut rng, ny, 0.2);
            vec![row; nx]
        }
        // deterministic channel
        1 => (0..nx)
            .map(|_| {
                let hit = rng.random_range(0..ny);
                (0..ny).map(|b| if b == hit { 1.0 } else { 0.0 }).collect()
            })
            .collect(),
        _ => (0..nx).map(|_| random_dist(&mut rng, ny, 0.25)).collect(),
    };
    let channel = Dmc::from_matrix(matrix)?;
    let input = ProbVector::from_probs(random_dist(&mut rng, nx, 0.1))?;
    let decoder = if rng.random_bool(0.8) {
        DecoderKind::Ml
    } else {
        DecoderKind::Typicality { eps: rng.random_range(0.05..2.0) }
    };
    let partition = SemanticPartition::new(1 << k, 1 << j, scheme)?;
    let count = match regime {
        Regime::PerClass => 1u64 << j,
        Regime::FullCodebook => 1u64 << k,
    };
    let codebook = Codebook::random(count, n, &input, &mut rng)?;
    FanoInstance::from_system(CodedSystem::new(partition, codebook, regime, channel, input, decoder)?)
}

/// One campaign instance with its checks.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignRecord {
    pub index: u32,
    pub n: usize,
    pub messages: usize,
    pub classes: usize,
    pub regime: Regime,
    pub decoder: DecoderKind,
    pub fano: FanoCheck,
    pub chain: ConverseChain,
}

#[derive(Debug, Clone, Serialize)]
pub struct Campaign {
    pub seed: u64,
    pub instances: usize,
    pub fano_holds: usize,
    pub chain_holds: usize,
    pub worst_fano_slack: f64,
    pub records: Vec<CampaignRecord>,
}

/// Checks the Fano bound and the converse chain on `count` random instances.
pub fn fano_campaign(count: u32, seed: u64) -> Result<Campaign> {
    let records: Vec<CampaignRecord> = par::map_indexed(count as usize, |i| -> Result<CampaignRecord> {
        let inst = random_instance(seed, i as u32)?;
        let e = exact_evaluate(&inst.system)?;
        let fano = check_fano_with(&inst, &e)?;
        let chain = converse_chain_with(&inst, &e, &fano)?;
        let s = &inst.system;
        Ok(CampaignRecord {
            index: i as u32,
            n: s.codebook.blocklength(),
            messages: s.partition.message_count(),
            classes: s.partition.class_count(),
            regime: s.regime,
            decoder: s.decoder,
            fano,
            chain,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(Campaign {
        seed,
        instances: records.len(),
        fano_holds: records.iter().filter(|r| r.fano.holds).count(),
        chain_holds: records.iter().filter(|r| r.chain.holds).count(),
        worst_fano_slack: records.iter().map(|r| r.fano.slack).fold(f64::INFINITY, f64::min),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{bsc, identity};

    fn params(n: usize, rate: f64, alpha: f64, beta: f64) -> FanoParams {
        FanoParams { n, rate, alpha, beta }
    }

    #[test]
    fn worked_example() {
        let p = params(4, 1.0, 0.5, 0.25);
        // independent arithmetic: gamma = log2(0.75)/4 + 1
        let gamma = 1.0 + (0.75f64).ln() / (4.0 * std::f64::consts::LN_2);
        assert!((p.gamma().unwrap() - gamma).abs() < 1e-15);
        assert!((p.gamma().unwrap() - 0.896_240).abs() < 1e-6);
        assert!((p.bound(0.1).unwrap() - 3.158_496).abs() < 1e-6);
    }

    #[test]
    fn error_free_bound() {
        let p = params(6, 0.5, 0.25, 0.125);
        assert!((p.bound(0.0).unwrap() - (1.0 + 0.75 * 3.0)).abs() < 1e-15);
    }

    #[test]
    fn alpha_one_is_classic_fano() {
        for nr in 1..=12 {
            let size = 2f64.powi(nr);
            let p = params(nr as usize, 1.0, 1.0, 1.0 / size);
            for pe in [0.0, 0.01, 0.3, 0.9, 1.0] {
                let classic = 1.0 + pe * (size - 1.0).log2();
                assert!((p.bound(pe).unwrap() - classic).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(params(4, 1.0, 0.5, 1.0).bound(0.1).is_err());
        assert!(params(4, 1.0, 0.5, 0.25).bound(1.5).is_err());
        assert!(params(4, 1.0, 0.5, -0.1).gamma().is_err());
        assert_eq!(params(4, 1.0, 0.5, 0.0).gamma().unwrap(), 1.0);
    }

    fn system(ch: Dmc, nx: usize, words: Vec<Vec<usize>>, messages: u64, decoder: DecoderKind) -> CodedSystem {
        let p = SemanticPartition::new(messages, words.len() as u64, PartitionScheme::Contiguous).unwrap();
        CodedSystem::new(p, Codebook::from_codewords(words, nx).unwrap(), Regime::PerClass, ch, ProbVector::uniform(nx).unwrap(), decoder)
            .unwrap()
    }

    #[test]
    fn useless_channel_bound_covers_full_equivocation() {
        let inst = FanoInstance::from_system(system(bsc(0.5).unwrap(), 2, vec![vec![0, 1], vec![1, 1]], 8, DecoderKind::Ml)).unwrap();
        let c = check_fano(&inst).unwrap();
        assert!((c.lhs - 3.0).abs() < 1e-12);
        assert_eq!(c.p_sem, 1.0);
        assert!(c.holds && c.rhs >= 3.0);
    }

    #[test]
    fn noiseless_slack_is_one_bit() {
        let words = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let inst = FanoInstance::from_system(system(identity(2).unwrap(), 2, words, 16, DecoderKind::Ml)).unwrap();
        let c = check_fano(&inst).unwrap();
        assert_eq!(c.p_sem, 0.0);
        assert!((c.slack - 1.0).abs() < 1e-12);
        let chain = converse_chain(&inst).unwrap();
        assert!(chain.holds, "{chain:?}");
        assert!((chain.mi_x_y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn instances_are_reproducible() {
        let a = random_instance(3, 17).unwrap();
        let b = random_instance(3, 17).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.system.codebook, b.system.codebook);
        assert_eq!(a.system.channel, b.system.channel);
    }

    #[test]
    fn small_campaign_holds() {
        let c = fano_campaign(200, 99).unwrap();
        assert_eq!(c.fano_holds, 200);
        assert_eq!(c.chain_holds, 200);
        assert!(c.worst_fano_slack >= -ENTROPY_SLACK);
    }
}
