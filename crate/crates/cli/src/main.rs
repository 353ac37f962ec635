//! `semcc`: experiment driver for semantic information measures and semantic channel coding.

mod capacity;
mod entropy;
mod fano;
mod output;
mod simulate;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "semcc", version, about = "Semantic entropy, semantic capacity and many-to-one channel coding experiments")]
struct Cli {
    /// Worker threads for data-parallel stages (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Seed for every random stream of the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the output document here instead of stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// JSON parameter file, or any output document of a previous run, to rerun.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Allow a randomized run without --seed; a fresh seed is drawn and recorded.
    #[arg(long)]
    pub ephemeral: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Shannon and semantic entropy of a source under a knowledge base.
    Entropy(entropy::EntropyArgs),
    /// Channel capacity and semantic capacity.
    Capacity(capacity::CapacityArgs),
    /// Random-coding error rates over a blocklength grid (CSV).
    Simulate(simulate::SimulateArgs),
    /// Semantic Fano bound, or a campaign checking it on random small systems.
    Fano(fano::FanoArgs),
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.chain().find_map(|e| e.downcast_ref::<semcc::Error>()) {
            Some(semcc::Error::Numeric { .. } | semcc::Error::NotConverged(_)) => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        };
        Failure { code, error }
    }
}

impl From<semcc::Error> for Failure {
    fn from(e: semcc::Error) -> Self {
        anyhow::Error::new(e).into()
    }
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = threads else { return Ok(()) };
    anyhow::ensure!(n >= 1, "--threads must be at least 1");
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Entropy(a) => entropy::run(a),
        Command::Capacity(a) => capacity::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Fano(a) => fano::run(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
