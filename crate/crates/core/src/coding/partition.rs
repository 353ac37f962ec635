use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::config::CodeConfig;
use crate::channels::{ChannelRng, StreamTag};
use crate::error::{Error, Result};

/// Largest message set that is materialized as an explicit partition.
pub const MAX_PARTITION_MESSAGES: u64 = 1 << 24;

/// How messages are grouped into semantic classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionScheme {
    /// Consecutive indices share a class.
    Contiguous,
    /// Class of `w` is `w mod class_count`.
    Interleaved,
    /// Seeded shuffle, then contiguous split.
    SeededRandom { seed: u64 },
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionScheme::Contiguous => f.write_str("contiguous"),
            PartitionScheme::Interleaved => f.write_str("interleaved"),
            PartitionScheme::SeededRandom { seed } => write!(f, "seeded-random:{seed}"),
        }
    }
}

impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contiguous" => Ok(PartitionScheme::Contiguous),
            "interleaved" => Ok(PartitionScheme::Interleaved),
            other => match other.strip_prefix("seeded-random:") {
                Some(seed) => seed
                    .parse()
                    .map(|seed| PartitionScheme::SeededRandom { seed })
                    .map_err(|_| Error::config(format!("bad partition seed in {other:?}"))),
                None => Err(Error::config(format!(
                    "unknown partition scheme {other:?}; expected contiguous, interleaved or seeded-random:<seed>"
                ))),
            },
        }
    }
}

impl Serialize for PartitionScheme {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PartitionScheme {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Disjoint semantic classes covering the message set `0..message_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemanticPartition {
    message_count: usize,
    class_of: Vec<u32>,
    /// Sorted members of each class.
    classes: Vec<Vec<u32>>,
    scheme: PartitionScheme,
}

impl SemanticPartition {
    pub fn new(message_count: u64, class_count: u64, scheme: PartitionScheme) -> Result<Self> {
        if class_count == 0 || message_count == 0 {
            return Err(Error::config("partition needs at least one message and one class"));
        }
        if class_count > message_count {
            return Err(Error::config(format!("{class_count} classes exceed {message_count} messages")));
        }
        if message_count > MAX_PARTITION_MESSAGES {
            return Err(Error::config(format!(
                "{message_count} messages exceed the explicit partition limit {MAX_PARTITION_MESSAGES}"
            )));
        }
        let (n, k) = (message_count as usize, class_count as usize);
        let base = n / k;
        // contiguous split of an ordering; the last class absorbs any remainder
        let split = |order: &[u32]| -> Vec<u32> {
            let mut class_of = vec![0u32; n];
            for (pos, &w) in order.iter().enumerate() {
                class_of[w as usize] = (pos / base).min(k - 1) as u32;
            }
            class_of
        };
        let class_of = match scheme {
            PartitionScheme::Contiguous => split(&(0..n as u32).collect::<Vec<_>>()),
            PartitionScheme::Interleaved => (0..n).map(|w| (w % k) as u32).collect(),
            PartitionScheme::SeededRandom { seed } => {
                let mut order: Vec<u32> = (0..n as u32).collect();
                order.shuffle(&mut ChannelRng::for_item(seed, StreamTag::Partition, 0, 0));
                split(&order)
            }
        };
        let mut classes = vec![Vec::with_capacity(base + 1); k];
        for (w, &m) in class_of.iter().enumerate() {
            classes[m as usize].push(w as u32);
        }
        Ok(SemanticPartition { message_count: n, class_of, classes, scheme })
    }

    /// Semantic index of message `w` (0-based).
    pub fn semantic_map(&self, w: usize) -> Result<usize> {
        self.class_of
            .get(w)
            .map(|&m| m as usize)
            .ok_or_else(|| Error::validation(format!("message {w} outside [0, {})", self.message_count)))
    }

    #[inline]
    pub(crate) fn class_of(&self, w: usize) -> usize {
        self.class_of[w] as usize
    }

    pub fn message_count(&self) -> usize {
        self.message_count
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn class(&self, m: usize) -> &[u32] {
        &self.classes[m]
    }

    pub fn scheme(&self) -> PartitionScheme {
        self.scheme
    }

    /// The message a class-level decoder reports for class `m`: its smallest member.
    pub fn representative(&self, m: usize) -> usize {
        self.classes[m][0] as usize
    }

    pub fn largest_class(&self) -> usize {
        self.classes.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_equal_classes(&self) -> bool {
        let first = self.classes[0].len();
        self.classes.iter().all(|c| c.len() == first)
    }
}

/// Partition of `2^ceil(nR)` messages into `2^ceil(alpha nR)` classes.
pub fn make_partition(cfg: &CodeConfig, scheme: PartitionScheme) -> Result<SemanticPartition> {
    SemanticPartition::new(cfg.message_count()?, cfg.semantic_count()?, scheme)
}
