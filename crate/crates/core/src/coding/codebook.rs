use rand::Rng;
use serde::Serialize;

use super::config::CodeConfig;
use super::partition::SemanticPartition;
use crate::channels::{ChannelRng, StreamTag};
use crate::error::{Error, Result};
use crate::info::{cumulative, sample_index, ProbVector};

/// Largest number of stored symbols (codewords x blocklength) in one codebook.
pub const MAX_CODEBOOK_SYMBOLS: u64 = 1 << 28;

/// Codewords drawn i.i.d. from an input distribution, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codebook {
    n: usize,
    alphabet: usize,
    #[serde(skip)]
    words: Vec<usize>,
    count: usize,
    /// `(seed, stream)` the codebook was drawn from, if random.
    origin: Option<(u64, u64)>,
}

impl Codebook {
    /// Draws `count` codewords of length `n` with i.i.d. symbols from `px`.
    pub fn random(count: u64, n: usize, px: &ProbVector, rng: &mut ChannelRng) -> Result<Self> {
        if count == 0 || n == 0 {
            return Err(Error::config("codebook needs at least one codeword of positive length"));
        }
        if count.saturating_mul(n as u64) > MAX_CODEBOOK_SYMBOLS {
            return Err(Error::config(format!(
                "{count} codewords of length {n} exceed the explicit codebook limit of {MAX_CODEBOOK_SYMBOLS} symbols"
            )));
        }
        let cum = cumulative(px.probs());
        let words = (0..count as usize * n).map(|_| sample_index(px.probs(), &cum, rng.random())).collect();
        Ok(Codebook { n, alphabet: px.len(), words, count: count as usize, origin: Some((rng.seed(), rng.stream())) })
    }

    /// Wraps explicit codewords.
    pub fn from_codewords(codewords: Vec<Vec<usize>>, alphabet: usize) -> Result<Self> {
        let n = codewords.first().map(Vec::len).unwrap_or(0);
        if n == 0 {
            return Err(Error::validation("codebook needs at least one non-empty codeword"));
        }
        if let Some(bad) = codewords.iter().position(|c| c.len() != n) {
            return Err(Error::validation(format!("codeword {bad} has length {}, expected {n}", codewords[bad].len())));
        }
        if let Some(s) = codewords.iter().flatten().find(|&&s| s >= alphabet) {
            return Err(Error::validation(format!("codeword symbol {s} outside an alphabet of {alphabet}")));
        }
        let count = codewords.len();
        Ok(Codebook { n, alphabet, words: codewords.concat(), count, origin: None })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn origin(&self) -> Option<(u64, u64)> {
        self.origin
    }

    #[inline]
    pub fn codeword(&self, i: usize) -> &[usize] {
        &self.words[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.words.chunks_exact(self.n)
    }
}

/// Per-class codebook: one codeword per semantic class, `2^ceil(alpha nR)` in total,
/// drawn from the `(seed, Codebook, group, index)` stream.
pub fn generate_codebook(cfg: &CodeConfig, px: &ProbVector, seed: u64, group: u16, index: u32) -> Result<Codebook> {
    let mut rng = ChannelRng::for_item(seed, StreamTag::Codebook, group, index);
    Codebook::random(cfg.semantic_count()?, cfg.n, px, &mut rng)
}

/// Full codebook: one codeword per message, `2^ceil(nR)` in total.
pub fn generate_full_codebook(cfg: &CodeConfig, px: &ProbVector, seed: u64, group: u16, index: u32) -> Result<Codebook> {
    let mut rng = ChannelRng::for_item(seed, StreamTag::Codebook, group, index);
    Codebook::random(cfg.message_count()?, cfg.n, px, &mut rng)
}

/// Codeword sent for message `w` under a per-class codebook: that of its semantic class.
pub fn encode<'a>(w: usize, partition: &SemanticPartition, codebook: &'a Codebook) -> Result<&'a [usize]> {
    if codebook.len() != partition.class_count() {
        return Err(Error::validation(format!(
            "per-class codebook has {} codewords for {} classes",
            codebook.len(),
            partition.class_count()
        )));
    }
    Ok(codebook.codeword(partition.semantic_map(w)?))
}
