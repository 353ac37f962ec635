//! Many-to-one semantic channel coding: partitions, random codebooks, decoders,
//! Monte Carlo and exact evaluation, and the semantic Fano bound.

mod codebook;
mod config;
mod decode;
mod ensemble;
mod exact;
mod fano;
mod partition;
mod simulate;
mod sweep;

pub use codebook::{encode, generate_codebook, generate_full_codebook, Codebook, MAX_CODEBOOK_SYMBOLS};
pub use config::CodeConfig;
pub use decode::{decode_ml, decode_typicality, DecodeOutcome, Decoder, DecoderKind, LogLikTable, LOGLIK_SCALE};
pub use ensemble::{MAX_ATOMS, MAX_JOINT_TYPES};
pub use exact::{exact_evaluate, ExactEvaluation, EXACT_BUDGET};
pub use fano::{
    check_fano, check_fano_with, converse_chain, fano_bound, fano_campaign, random_instance, Campaign, CampaignRecord,
    ConverseChain, FanoCheck, FanoInstance, FanoParams, CAPACITY_SLACK, ENTROPY_SLACK,
};
pub use partition::{make_partition, PartitionScheme, SemanticPartition, MAX_PARTITION_MESSAGES};
pub use simulate::{
    simulate, simulate_full_codebook, simulate_system, CodebookMode, CodedSystem, Engine, Regime, SimOptions,
    SimulationReport, MAX_FULL_CODEBOOK,
};
pub use sweep::{run_sweep, ExperimentConfig, InputChoice, SweepReport, SweepRow, CSV_COLUMNS, SCHEMA_VERSION};
