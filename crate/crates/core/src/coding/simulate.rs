use rand::Rng;
use serde::{Deserialize, Serialize};

use super::codebook::{generate_codebook, generate_full_codebook, Codebook};
use super::config::CodeConfig;
use super::decode::{DecodeOutcome, Decoder, DecoderKind};
use super::ensemble::{self, EnsembleJob};
use super::partition::{make_partition, PartitionScheme, SemanticPartition};
use crate::capacity::Dmc;
use crate::channels::{ChannelRng, ChannelSampler, StreamTag};
use crate::error::{Error, Result};
use crate::info::ProbVector;
use crate::par;
use crate::stats::Proportion;

/// Largest message count for the full-codebook variant.
pub const MAX_FULL_CODEBOOK: u64 = 1 << 20;
/// Auto engine: per-class codebooks at most this large are simulated explicitly.
pub const AUTO_EXPLICIT_CODEWORDS: u64 = 1 << 12;
pub const AUTO_EXPLICIT_SYMBOLS: u64 = 1 << 20;

const TRIAL_CHUNK: usize = 1024;

/// Whether each trial draws a new codebook or all trials share one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookMode {
    #[default]
    Fresh,
    Fixed,
}

/// How trials are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Explicit when the codebook is small, ensemble otherwise.
    #[default]
    Auto,
    /// Materialize the codebook and decode against every codeword.
    Explicit,
    /// Exact ensemble sampling from competitor statistics (fresh codebooks only).
    Ensemble,
}

/// One codeword per semantic class, or one per message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    #[default]
    PerClass,
    FullCodebook,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub trials: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub codebook: CodebookMode,
    pub engine: Engine,
    /// Stream group separating independent runs that share a seed (e.g. grid points).
    pub group: u16,
}

impl SimOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimOptions { trials, seed, decoder: DecoderKind::Ml, codebook: CodebookMode::Fresh, engine: Engine::Auto, group: 0 }
    }

    pub fn decoder(mut self, d: DecoderKind) -> Self {
        self.decoder = d;
        self
    }

    pub fn codebook(mut self, c: CodebookMode) -> Self {
        self.codebook = c;
        self
    }

    pub fn engine(mut self, e: Engine) -> Self {
        self.engine = e;
        self
    }

    pub fn group(mut self, g: u16) -> Self {
        self.group = g;
        self
    }
}

/// Counts and interval estimates of a simulation, with everything needed to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub n: usize,
    /// `log2` of the message count.
    pub message_bits: f64,
    /// `log2` of the semantic class count.
    pub semantic_bits: f64,
    pub rate: f64,
    pub alpha: f64,
    pub requested: Option<CodeConfig>,
    pub trials: u64,
    pub semantic_errors: u64,
    pub message_errors: u64,
    pub p_sem: Proportion,
    pub p_msg: Proportion,
    pub seed: u64,
    pub group: u16,
    pub decoder: DecoderKind,
    pub codebook: CodebookMode,
    pub engine: Engine,
    pub regime: Regime,
    pub partition: PartitionScheme,
}

impl SimulationReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        message_bits: f64,
        semantic_bits: f64,
        requested: Option<CodeConfig>,
        counts: (u64, u64),
        trials: u64,
        opts: &SimOptions,
        engine: Engine,
        regime: Regime,
        partition: PartitionScheme,
    ) -> Self {
        let (semantic_errors, message_errors) = counts;
        assert!(
            semantic_errors <= message_errors,
            "semantic errors {semantic_errors} exceed message errors {message_errors}"
        );
        if message_bits == semantic_bits {
            assert_eq!(semantic_errors, message_errors, "alpha = 1 run with differing error counts");
        }
        SimulationReport {
            n,
            message_bits,
            semantic_bits,
            rate: message_bits / n as f64,
            alpha: semantic_bits / message_bits,
            requested,
            trials,
            semantic_errors,
            message_errors,
            p_sem: Proportion::wilson(semantic_errors, trials),
            p_msg: Proportion::wilson(message_errors, trials),
            seed: opts.seed,
            group: opts.group,
            decoder: opts.decoder,
            codebook: opts.codebook,
            engine,
            regime,
            partition,
        }
    }
}

/// A concrete coded system: partition, codebook, channel and decoder.
#[derive(Debug, Clone)]
pub struct CodedSystem {
    pub partition: SemanticPartition,
    pub codebook: Codebook,
    pub regime: Regime,
    pub channel: Dmc,
    pub input: ProbVector,
    pub decoder: DecoderKind,
}

impl CodedSystem {
    pub fn new(
        partition: SemanticPartition,
        codebook: Codebook,
        regime: Regime,
        channel: Dmc,
        input: ProbVector,
        decoder: DecoderKind,
    ) -> Result<Self> {
        let expected = match regime {
            Regime::PerClass => partition.class_count(),
            Regime::FullCodebook => partition.message_count(),
        };
        if codebook.len() != expected {
            return Err(Error::validation(format!(
                "{regime:?} codebook needs {expected} codewords, got {}",
                codebook.len()
            )));
        }
        if codebook.alphabet() != channel.input_size() || input.len() != channel.input_size() {
            return Err(Error::validation("codebook, input distribution and channel alphabets differ"));
        }
        Ok(CodedSystem { partition, codebook, regime, channel, input, decoder })
    }

    /// Codeword index sent for message `w`.
    #[inline]
    pub fn codeword_of(&self, w: usize) -> usize {
        codeword_of(self.regime, &self.partition, w)
    }

    /// `(semantic error, message error)` for message `w` and decoder output `out`.
    #[inline]
    pub fn judge(&self, w: usize, out: DecodeOutcome) -> (bool, bool) {
        judge(self.regime, &self.partition, w, out)
    }

    pub fn message_bits(&self) -> f64 {
        (self.partition.message_count() as f64).log2()
    }

    pub fn semantic_bits(&self) -> f64 {
        (self.partition.class_count() as f64).log2()
    }
}

#[inline]
fn codeword_of(regime: Regime, p: &SemanticPartition, w: usize) -> usize {
    match regime {
        Regime::PerClass => p.class_of(w),
        Regime::FullCodebook => w,
    }
}

/// Per-class decoders report a class; the message estimate is its representative.
#[inline]
fn judge(regime: Regime, p: &SemanticPartition, w: usize, out: DecodeOutcome) -> (bool, bool) {
    match (out, regime) {
        (DecodeOutcome::Erasure, _) => (true, true),
        (DecodeOutcome::Index(m), Regime::PerClass) => (m != p.class_of(w), p.representative(m) != w),
        (DecodeOutcome::Index(v), Regime::FullCodebook) => (p.class_of(v) != p.class_of(w), v != w),
    }
}

enum Source<'a> {
    Fixed(&'a Codebook),
    Fresh { cfg: &'a CodeConfig, px: &'a ProbVector, regime: Regime },
}

struct Explicit<'a> {
    partition: &'a SemanticPartition,
    regime: Regime,
    channel: &'a Dmc,
    decoder: Decoder,
    source: Source<'a>,
}

impl Explicit<'_> {
    fn run(&self, trials: u64, seed: u64, group: u16) -> Result<(u64, u64)> {
        let sampler = ChannelSampler::new(self.channel);
        let chunks = par::map_chunks(trials as usize, TRIAL_CHUNK, |range| -> Result<(u64, u64)> {
            let (mut sem, mut msg) = (0u64, 0u64);
            let mut y = Vec::new();
            for t in range {
                let fresh;
                let cb = match &self.source {
                    Source::Fixed(cb) => *cb,
                    Source::Fresh { cfg, px, regime } => {
                        fresh = match regime {
                            Regime::PerClass => generate_codebook(cfg, px, seed, group, t as u32)?,
                            Regime::FullCodebook => generate_full_codebook(cfg, px, seed, group, t as u32)?,
                        };
                        &fresh
                    }
                };
                let mut rng = ChannelRng::for_item(seed, StreamTag::Trial, group, t as u32);
                let w = rng.random_range(0..self.partition.message_count());
                let x = cb.codeword(codeword_of(self.regime, self.partition, w));
                sampler.transmit_into(x, &mut rng, &mut y);
                let (s, m) = judge(self.regime, self.partition, w, self.decoder.decode(&y, cb));
                sem += s as u64;
                msg += m as u64;
            }
            Ok((sem, msg))
        });
        chunks.into_iter().try_fold((0, 0), |acc, c| c.map(|(s, m)| (acc.0 + s, acc.1 + m)))
    }
}

fn check_common(ch: &Dmc, px: &ProbVector, opts: &SimOptions) -> Result<()> {
    if opts.trials == 0 {
        return Err(Error::validation("simulation needs at least one trial"));
    }
    if opts.trials > u32::MAX as u64 {
        return Err(Error::config("at most 2^32 - 1 trials per run"));
    }
    if px.len() != ch.input_size() {
        return Err(Error::validation(format!(
            "input distribution has {} symbols, channel has {} inputs",
            px.len(),
            ch.input_size()
        )));
    }
    Ok(())
}

/// Random-coding simulation with one codeword per semantic class.
///
/// Each trial draws a message uniformly, sends the codeword of its class and decodes a
/// class. A semantic error is a wrong class (or an erasure); the message estimate is the
/// smallest member of the decoded class, so message errors also count within-class misses.
///
/// With [`Engine::Ensemble`] (or `Auto` on large codebooks) trials sample the outcome of
/// a fresh random codebook exactly without storing it, which lifts the size limit on
/// `2^ceil(alpha nR)`.
pub fn simulate(cfg: &CodeConfig, scheme: PartitionScheme, ch: &Dmc, px: &ProbVector, opts: &SimOptions) -> Result<SimulationReport> {
    check_common(ch, px, opts)?;
    let codewords = cfg.semantic_count().unwrap_or(u64::MAX);
    let symbols = codewords.saturating_mul(cfg.n as u64);
    let engine = match opts.engine {
        Engine::Auto if opts.codebook == CodebookMode::Fixed => Engine::Explicit,
        Engine::Auto if codewords <= AUTO_EXPLICIT_CODEWORDS && symbols <= AUTO_EXPLICIT_SYMBOLS => Engine::Explicit,
        Engine::Auto => Engine::Ensemble,
        e => e,
    };
    let counts = match engine {
        Engine::Ensemble => {
            if opts.codebook == CodebookMode::Fixed {
                return Err(Error::config("the ensemble engine samples fresh codebooks; use the explicit engine for a fixed codebook"));
            }
            let c = ensemble::run(&EnsembleJob {
                channel: ch,
                input: px,
                decoder: opts.decoder,
                n: cfg.n,
                semantic_bits: cfg.semantic_bits(),
                class_bits: cfg.class_bits(),
                trials: opts.trials,
                seed: opts.seed,
                group: opts.group,
            })?;
            (c.semantic_errors, c.message_errors)
        }
        _ => {
            let partition = make_partition(cfg, scheme)?;
            let decoder = Decoder::new(opts.decoder, ch, px)?;
            let fixed;
            let source = match opts.codebook {
                CodebookMode::Fixed => {
                    fixed = generate_codebook(cfg, px, opts.seed, opts.group, u32::MAX)?;
                    Source::Fixed(&fixed)
                }
                CodebookMode::Fresh => Source::Fresh { cfg, px, regime: Regime::PerClass },
            };
            Explicit { partition: &partition, regime: Regime::PerClass, channel: ch, decoder, source }.run(
                opts.trials,
                opts.seed,
                opts.group,
            )?
        }
    };
    Ok(SimulationReport::new(
        cfg.n,
        cfg.message_bits() as f64,
        cfg.semantic_bits() as f64,
        Some(*cfg),
        counts,
        opts.trials,
        opts,
        engine,
        Regime::PerClass,
        scheme,
    ))
}

/// Simulation with one codeword per message; the decoder estimates the message itself.
pub fn simulate_full_codebook(
    cfg: &CodeConfig,
    partition: &SemanticPartition,
    ch: &Dmc,
    px: &ProbVector,
    opts: &SimOptions,
) -> Result<SimulationReport> {
    check_common(ch, px, opts)?;
    let count = cfg.message_count()?;
    if count > MAX_FULL_CODEBOOK {
        return Err(Error::config(format!(
            "full codebook of {count} codewords exceeds the cap {MAX_FULL_CODEBOOK}; use the per-class simulation"
        )));
    }
    if partition.message_count() as u64 != count {
        return Err(Error::validation(format!(
            "partition covers {} messages, config has {count}",
            partition.message_count()
        )));
    }
    if opts.engine == Engine::Ensemble {
        return Err(Error::config("the full-codebook simulation runs explicitly only"));
    }
    let decoder = Decoder::new(opts.decoder, ch, px)?;
    let fixed;
    let source = match opts.codebook {
        CodebookMode::Fixed => {
            fixed = generate_full_codebook(cfg, px, opts.seed, opts.group, u32::MAX)?;
            Source::Fixed(&fixed)
        }
        CodebookMode::Fresh => Source::Fresh { cfg, px, regime: Regime::FullCodebook },
    };
    let counts = Explicit { partition, regime: Regime::FullCodebook, channel: ch, decoder, source }.run(
        opts.trials,
        opts.seed,
        opts.group,
    )?;
    Ok(SimulationReport::new(
        cfg.n,
        cfg.message_bits() as f64,
        (partition.class_count() as f64).log2(),
        Some(*cfg),
        counts,
        opts.trials,
        opts,
        Engine::Explicit,
        Regime::FullCodebook,
        partition.scheme(),
    ))
}

/// Monte Carlo over a given system with its codebook held fixed.
pub fn simulate_system(sys: &CodedSystem, trials: u64, seed: u64, group: u16) -> Result<SimulationReport> {
    let opts = SimOptions::new(trials, seed).decoder(sys.decoder).codebook(CodebookMode::Fixed).group(group);
    check_common(&sys.channel, &sys.input, &opts)?;
    let decoder = Decoder::new(sys.decoder, &sys.channel, &sys.input)?;
    let counts = Explicit {
        partition: &sys.partition,
        regime: sys.regime,
        channel: &sys.channel,
        decoder,
        source: Source::Fixed(&sys.codebook),
    }
    .run(trials, seed, group)?;
    Ok(SimulationReport::new(
        sys.codebook.blocklength(),
        sys.message_bits(),
        sys.semantic_bits(),
        None,
        counts,
        trials,
        &opts,
        Engine::Explicit,
        sys.regime,
        sys.partition.scheme(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{bsc, identity};

    fn uniform2() -> ProbVector {
        ProbVector::uniform(2).unwrap()
    }

    #[test]
    fn noiseless_channel_with_distinct_codewords_never_errs() {
        let ch = identity(4).unwrap();
        let px = ProbVector::uniform(4).unwrap();
        let cfg = CodeConfig::from_bits(2, 4, 2).unwrap();
        let p = make_partition(&cfg, PartitionScheme::Contiguous).unwrap();
        let cb = Codebook::from_codewords(vec![vec![0, 0], vec![1, 1], vec![2, 2], vec![3, 3]], 4).unwrap();
        let sys = CodedSystem::new(p, cb, Regime::PerClass, ch, px, DecoderKind::Ml).unwrap();
        let r = simulate_system(&sys, 2000, 1, 0).unwrap();
        assert_eq!(r.semantic_errors, 0);
        // within-class misses only: 3 of every 4 messages are not the representative
        assert!((r.p_msg.estimate - 0.75).abs() < 0.04);
    }

    #[test]
    fn useless_channel_always_erases() {
        let cfg = CodeConfig::from_bits(64, 2, 1).unwrap();
        for d in [DecoderKind::Ml, DecoderKind::Typicality { eps: 0.1 }] {
            let o = SimOptions::new(4000, 2).decoder(d);
            let r = simulate(&cfg, PartitionScheme::Contiguous, &bsc(0.5).unwrap(), &uniform2(), &o).unwrap();
            // every likelihood ties and every pair is typical, so decoding never commits
            assert_eq!(r.semantic_errors, 4000);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = CodeConfig::new(12, 0.5, 0.5).unwrap();
        let ch = bsc(0.1).unwrap();
        let o = SimOptions::new(3000, 11);
        let a = simulate(&cfg, PartitionScheme::Interleaved, &ch, &uniform2(), &o).unwrap();
        let b = simulate(&cfg, PartitionScheme::Interleaved, &ch, &uniform2(), &o).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cfg, PartitionScheme::Interleaved, &ch, &uniform2(), &SimOptions::new(3000, 12)).unwrap();
        assert_ne!((a.semantic_errors, a.message_errors), (c.semantic_errors, c.message_errors));
    }

    #[test]
    fn ensemble_agrees_with_explicit_sampling() {
        let cfg = CodeConfig::from_bits(16, 8, 6).unwrap();
        let ch = bsc(0.1).unwrap();
        let trials = 20_000;
        let ex = simulate(&cfg, PartitionScheme::Contiguous, &ch, &uniform2(), &SimOptions::new(trials, 5).engine(Engine::Explicit)).unwrap();
        let en = simulate(&cfg, PartitionScheme::Contiguous, &ch, &uniform2(), &SimOptions::new(trials, 6).engine(Engine::Ensemble)).unwrap();
        assert_eq!(en.engine, Engine::Ensemble);
        for (a, b) in [(ex.p_sem, en.p_sem), (ex.p_msg, en.p_msg)] {
            let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
            assert!((a.estimate - b.estimate).abs() < 4.0 * se, "{} vs {}", a.estimate, b.estimate);
        }
    }

    #[test]
    fn ensemble_agrees_with_explicit_typicality() {
        let cfg = CodeConfig::from_bits(12, 4, 3).unwrap();
        let ch = bsc(0.05).unwrap();
        let d = DecoderKind::Typicality { eps: 0.4 };
        let trials = 20_000;
        let ex = simulate(&cfg, PartitionScheme::Contiguous, &ch, &uniform2(), &SimOptions::new(trials, 7).decoder(d).engine(Engine::Explicit)).unwrap();
        let en = simulate(&cfg, PartitionScheme::Contiguous, &ch, &uniform2(), &SimOptions::new(trials, 8).decoder(d).engine(Engine::Ensemble)).unwrap();
        let se = (ex.p_sem.std_error().powi(2) + en.p_sem.std_error().powi(2)).sqrt();
        assert!((ex.p_sem.estimate - en.p_sem.estimate).abs() < 4.0 * se, "{} vs {}", ex.p_sem.estimate, en.p_sem.estimate);
    }

    #[test]
    fn alpha_one_counts_are_equal() {
        let cfg = CodeConfig::new(10, 0.4, 1.0).unwrap();
        let ch = bsc(0.1).unwrap();
        for engine in [Engine::Explicit, Engine::Ensemble] {
            let r = simulate(&cfg, PartitionScheme::Contiguous, &ch, &uniform2(), &SimOptions::new(5000, 3).engine(engine)).unwrap();
            assert_eq!(r.semantic_errors, r.message_errors);
        }
        let p = make_partition(&cfg, PartitionScheme::Contiguous).unwrap();
        let r = simulate_full_codebook(&cfg, &p, &ch, &uniform2(), &SimOptions::new(5000, 3)).unwrap();
        assert_eq!(r.semantic_errors, r.message_errors);
    }

    #[test]
    fn full_codebook_semantic_errors_are_rarer() {
        let cfg = CodeConfig::from_bits(32, 4, 2).unwrap();
        let p = make_partition(&cfg, PartitionScheme::Contiguous).unwrap();
        let r = simulate_full_codebook(&cfg, &p, &bsc(0.1).unwrap(), &uniform2(), &SimOptions::new(10_000, 21)).unwrap();
        assert!(r.semantic_errors <= r.message_errors);
        assert!(r.p_sem.estimate < 0.01 && r.p_msg.estimate < 0.01);

        // a short code over an asymmetric channel (few exact likelihood ties, so most
        // errors are confusions and a quarter of those stay inside the class)
        let ch = Dmc::from_matrix(vec![vec![0.93, 0.07], vec![0.18, 0.82]]).unwrap();
        let cfg = CodeConfig::from_bits(8, 4, 2).unwrap();
        let p = make_partition(&cfg, PartitionScheme::Contiguous).unwrap();
        let o = SimOptions::new(10_000, 21).codebook(CodebookMode::Fixed);
        let r = simulate_full_codebook(&cfg, &p, &ch, &uniform2(), &o).unwrap();
        assert!(r.p_sem.hi < r.p_msg.lo, "{:?} vs {:?}", r.p_sem, r.p_msg);
        let cb = generate_full_codebook(&cfg, &uniform2(), 21, 0, u32::MAX).unwrap();
        let sys = CodedSystem::new(p, cb, Regime::FullCodebook, ch, uniform2(), DecoderKind::Ml).unwrap();
        let e = crate::coding::exact_evaluate(&sys).unwrap();
        assert!(e.p_sem < e.p_msg);
        assert!((r.p_sem.estimate - e.p_sem).abs() < 4.0 * (e.p_sem * (1.0 - e.p_sem) / 1e4).sqrt());
    }

    #[test]
    fn config_errors() {
        let ch = bsc(0.1).unwrap();
        let cfg = CodeConfig::from_bits(30, 24, 2).unwrap();
        let p = SemanticPartition::new(4, 2, PartitionScheme::Contiguous).unwrap();
        assert!(matches!(simulate_full_codebook(&cfg, &p, &ch, &uniform2(), &SimOptions::new(1, 1)), Err(Error::Config(_))));
        let small = CodeConfig::from_bits(4, 2, 1).unwrap();
        let fixed = SimOptions::new(1, 1).codebook(CodebookMode::Fixed).engine(Engine::Ensemble);
        assert!(simulate(&small, PartitionScheme::Contiguous, &ch, &uniform2(), &fixed).is_err());
        assert!(simulate(&small, PartitionScheme::Contiguous, &ch, &uniform2(), &SimOptions::new(0, 1)).is_err());
        assert!(simulate(&small, PartitionScheme::Contiguous, &ch, &ProbVector::uniform(3).unwrap(), &SimOptions::new(1, 1)).is_err());
    }
}
