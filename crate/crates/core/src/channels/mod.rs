//! Channel constructors and per-symbol transmission.

mod psk;
mod rng;
mod spec;

pub use psk::{mpsk_hard_dmc, sector_probabilities, PskChannel, PskConfig, PskEstimation, NOISE_CONVENTION};
pub use rng::{stream_id, ChannelRng, StreamTag};
pub use spec::ChannelSpec;

use rand::Rng;

use crate::capacity::Dmc;
use crate::error::{Error, Result};
use crate::info::{cumulative, sample_index, Sequence};

/// Binary symmetric channel with crossover probability `p`.
pub fn bsc(p: f64) -> Result<Dmc> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("crossover probability must lie in [0, 1], got {p}")));
    }
    Dmc::from_matrix(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
}

/// Noiseless channel over `k` symbols.
pub fn identity(k: usize) -> Result<Dmc> {
    if k == 0 {
        return Err(Error::validation("identity channel needs at least one symbol"));
    }
    Dmc::from_matrix((0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
}

/// Z-channel: input 0 is received intact, input 1 flips to 0 with probability `p`.
pub fn z_channel(p: f64) -> Result<Dmc> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("crossover probability must lie in [0, 1], got {p}")));
    }
    Dmc::from_matrix(vec![vec![1.0, 0.0], vec![p, 1.0 - p]])
}

/// Cumulative row tables for inverse-CDF sampling of channel outputs.
#[derive(Debug, Clone)]
pub struct ChannelSampler<'a> {
    ch: &'a Dmc,
    cum: Vec<Vec<f64>>,
}

impl<'a> ChannelSampler<'a> {
    pub fn new(ch: &'a Dmc) -> Self {
        ChannelSampler { ch, cum: ch.matrix().iter().map(|r| cumulative(r)).collect() }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        sample_index(&self.ch.matrix()[x], &self.cum[x], rng.random())
    }

    /// Transmits a sequence whose symbols are known to be valid inputs.
    pub fn transmit_into<R: Rng + ?Sized>(&self, x: &[usize], rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        out.extend(x.iter().map(|&s| self.sample(s, rng)));
    }
}

/// Sends `x` through the channel, one independent draw per symbol.
pub fn transmit(ch: &Dmc, x: &Sequence, rng: &mut ChannelRng) -> Result<Sequence> {
    x.check_alphabet(ch.input_size())?;
    let sampler = ChannelSampler::new(ch);
    let mut out = Vec::with_capacity(x.len());
    sampler.transmit_into(x.symbols(), rng, &mut out);
    Ok(Sequence(out))
}
