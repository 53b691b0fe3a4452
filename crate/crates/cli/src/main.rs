//! `voxent`: entropy-based textural heterogeneity for 3D grayscale volumes.

mod glcm_cmd;
mod inspect_cmd;
mod phantom_cmd;
mod rank_cmd;
mod stats_cmd;

use clap::{Parser, Subcommand};

/// Exit codes: 0 success, 1 runtime failure (nothing ranked, unreadable
/// input), 2 invalid configuration or arguments.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<voxent_core::Error> for CliError {
    fn from(e: voxent_core::Error) -> Self {
        match e {
            voxent_core::Error::InvalidConfig(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other.into()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Maps any library error to a usage error (exit 2), for argument-derived
/// failures like invalid phantom specs.
pub trait UsageErr<T> {
    fn usage_err(self) -> CliResult<T>;
}

impl<T> UsageErr<T> for Result<T, voxent_core::Error> {
    fn usage_err(self) -> CliResult<T> {
        self.map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Parser)]
#[command(
    name = "voxent",
    version,
    about = "Entropy-based textural heterogeneity for 3D grayscale volumes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank a dataset of volumes by entropy quantile probability.
    Rank(rank_cmd::RankArgs),
    /// Group-comparison statistics for a labelled CSV of values.
    Stats(stats_cmd::StatsArgs),
    /// GLCM baseline texture features per volume.
    Glcm(glcm_cmd::GlcmArgs),
    /// Generate synthetic raw volume + manifest pairs.
    Phantom(phantom_cmd::PhantomArgs),
    /// Print a summary of one volume.
    Inspect(inspect_cmd::InspectArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Rank(args) => rank_cmd::run(args),
        Command::Stats(args) => stats_cmd::run(args),
        Command::Glcm(args) => glcm_cmd::run(args),
        Command::Phantom(args) => phantom_cmd::run(args),
        Command::Inspect(args) => inspect_cmd::run(args),
    };
    match outcome {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

/// Builds a rayon pool with the requested degree of parallelism (0 keeps
/// the library default) and runs `f` inside it.
pub fn with_thread_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
