//! Seeded, splittable channel randomness.
//!
//! Every stream is ChaCha8 keyed by `seed` (expanded with `SeedableRng::seed_from_u64`)
//! with the 64-bit ChaCha stream id set to `stream`. Identical `(seed, stream)` pairs give
//! identical sequences on every platform; distinct stream ids give independent streams
//! without shared state, so parallel workers can derive their own.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream-id namespaces used across the crate. The tag occupies the top 16 bits of the
/// stream id, a group index the next 16, and a per-item index the low 32.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum StreamTag {
    User = 0,
    Codebook = 1,
    Trial = 2,
    Psk = 3,
    Instance = 4,
    Partition = 5,
}

pub fn stream_id(tag: StreamTag, group: u16, index: u32) -> u64 {
    ((tag as u64) << 48) | ((group as u64) << 32) | index as u64
}

#[derive(Debug, Clone)]
pub struct ChannelRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl ChannelRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        ChannelRng { seed, stream, inner }
    }

    pub fn for_item(seed: u64, tag: StreamTag, group: u16, index: u32) -> Self {
        Self::new(seed, stream_id(tag, group, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for ChannelRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
