//! Semantic information measures and many-to-one semantic channel coding.
//!
//! The crate is organized bottom-up:
//!
//! - [`info`]: probability vectors, joint laws, entropy kernels and weak joint typicality.
//! - [`semantics`]: knowledge bases, semantic entropy (discrete and differential),
//!   the knowledge/semantics entropy decomposition and the semantic compression gain.
//! - [`capacity`]: discrete memoryless channels, Blahut–Arimoto, semantic capacity.
//! - [`channels`]: channel constructors (BSC, M-PSK hard decision), the seeded
//!   channel RNG and per-symbol transmission.
//! - [`coding`]: semantic partitions, random codebooks, decoders, Monte Carlo
//!   simulation, exact small-instance evaluation and the semantic Fano machinery.
//!
//! All logarithms are base 2.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channels;
pub mod coding;
pub mod error;
pub mod info;
pub mod par;
pub mod quadrature;
pub mod semantics;
pub mod stats;

pub use capacity::{blahut_arimoto, semantic_capacity, awgn_capacity, CapacityResult, Dmc};
pub use error::{Error, Result};
pub use info::{JointDist, ProbVector, Sequence};
