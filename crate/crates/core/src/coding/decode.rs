use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use crate::capacity::Dmc;
use crate::error::{Error, Result};
use crate::info::{ProbVector, TypicalityTest};

/// Output of a decoder: a codeword index or the failure symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeOutcome {
    Index(usize),
    Erasure,
}

impl DecodeOutcome {
    pub fn index(self) -> Option<usize> {
        match self {
            DecodeOutcome::Index(i) => Some(i),
            DecodeOutcome::Erasure => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecoderKind {
    /// Maximum likelihood; exact ties at the maximum give an erasure.
    Ml,
    /// Unique weakly jointly typical codeword, else erasure.
    Typicality { eps: f64 },
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecoderKind::Ml => f.write_str("ml"),
            DecoderKind::Typicality { eps } => write!(f, "typicality:{eps}"),
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ml" {
            return Ok(DecoderKind::Ml);
        }
        match s.strip_prefix("typicality:").map(str::parse::<f64>) {
            Some(Ok(eps)) if eps > 0.0 => Ok(DecoderKind::Typicality { eps }),
            _ => Err(Error::config(format!("unknown decoder {s:?}; expected ml or typicality:<eps>"))),
        }
    }
}

/// Fixed-point scale of quantized log-likelihoods: `round(log2 p * 2^32)`.
pub const LOGLIK_SCALE: f64 = 4_294_967_296.0;

/// Per-symbol log2 channel probabilities as 32.32 fixed-point integers; `None` is a
/// zero probability.
///
/// Integer scores make codeword likelihood comparisons exact and independent of
/// summation order, so ties are well defined.
#[derive(Debug, Clone)]
pub struct LogLikTable {
    ny: usize,
    q: Vec<Option<i64>>,
}

impl LogLikTable {
    pub fn new(ch: &Dmc) -> Self {
        let ny = ch.output_size();
        let q = ch
            .matrix()
            .iter()
            .flatten()
            .map(|&p| (p > 0.0).then(|| (p.log2() * LOGLIK_SCALE).round() as i64))
            .collect();
        LogLikTable { ny, q }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<i64> {
        self.q[x * self.ny + y]
    }

    /// Quantized `log2 p(y | x)` of a sequence pair, `None` if the pair is impossible.
    #[inline]
    pub fn score(&self, x: &[usize], y: &[usize]) -> Option<i64> {
        let mut s = 0i64;
        for (&a, &b) in x.iter().zip(y) {
            s += self.q[a * self.ny + b]?;
        }
        Some(s)
    }
}

/// A ready-to-run decoder for a fixed channel (and input distribution, for typicality).
#[derive(Debug, Clone)]
pub enum Decoder {
    Ml(LogLikTable),
    Typicality(TypicalityTest),
}

impl Decoder {
    pub fn new(kind: DecoderKind, ch: &Dmc, px: &ProbVector) -> Result<Self> {
        match kind {
            DecoderKind::Ml => Ok(Decoder::Ml(LogLikTable::new(ch))),
            DecoderKind::Typicality { eps } => Ok(Decoder::Typicality(TypicalityTest::new(&ch.joint(px)?, eps)?)),
        }
    }

    pub fn decode(&self, y: &[usize], codebook: &Codebook) -> DecodeOutcome {
        match self {
            Decoder::Ml(t) => ml_argmax(y, codebook, t),
            Decoder::Typicality(t) => unique_typical(y, codebook, t),
        }
    }
}

fn check(y: &[usize], codebook: &Codebook, ch: &Dmc) -> Result<()> {
    if y.len() != codebook.blocklength() {
        return Err(Error::validation(format!(
            "received length {} differs from blocklength {}",
            y.len(),
            codebook.blocklength()
        )));
    }
    if codebook.alphabet() != ch.input_size() {
        return Err(Error::validation(format!(
            "codebook alphabet {} differs from channel input size {}",
            codebook.alphabet(),
            ch.input_size()
        )));
    }
    if let Some(&b) = y.iter().find(|&&b| b >= ch.output_size()) {
        return Err(Error::validation(format!("received symbol {b} outside the output alphabet")));
    }
    Ok(())
}

fn ml_argmax(y: &[usize], codebook: &Codebook, table: &LogLikTable) -> DecodeOutcome {
    let mut best: Option<i64> = None;
    let mut winner = None;
    let mut tied = false;
    for (i, x) in codebook.iter().enumerate() {
        let Some(s) = table.score(x, y) else { continue };
        match best {
            Some(b) if s < b => {}
            Some(b) if s == b => tied = true,
            _ => {
                best = Some(s);
                winner = Some(i);
                tied = false;
            }
        }
    }
    match winner {
        Some(i) if !tied => DecodeOutcome::Index(i),
        _ => DecodeOutcome::Erasure,
    }
}

fn unique_typical(y: &[usize], codebook: &Codebook, test: &TypicalityTest) -> DecodeOutcome {
    let mut found = None;
    for (i, x) in codebook.iter().enumerate() {
        if test.is_typical(x, y) {
            if found.is_some() {
                return DecodeOutcome::Erasure;
            }
            found = Some(i);
        }
    }
    found.map_or(DecodeOutcome::Erasure, DecodeOutcome::Index)
}

/// Maximum-likelihood decoding of `y` over `codebook`.
///
/// Returns the unique codeword of largest likelihood. Exact ties at the maximum, and
/// outputs impossible under every codeword, give [`DecodeOutcome::Erasure`].
pub fn decode_ml(y: &[usize], codebook: &Codebook, ch: &Dmc) -> Result<DecodeOutcome> {
    check(y, codebook, ch)?;
    Ok(ml_argmax(y, codebook, &LogLikTable::new(ch)))
}

/// Typicality decoding: the unique codeword weakly `eps`-jointly typical with `y` under
/// `px` and the channel, else erasure.
pub fn decode_typicality(y: &[usize], codebook: &Codebook, ch: &Dmc, px: &ProbVector, eps: f64) -> Result<DecodeOutcome> {
    check(y, codebook, ch)?;
    if px.len() != ch.input_size() {
        return Err(Error::validation("input distribution does not match the channel"));
    }
    let test = TypicalityTest::new(&ch.joint(px)?, eps)?;
    Ok(unique_typical(y, codebook, &test))
}
