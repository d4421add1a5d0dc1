//! Command-line driver: generators, reconstruction, distances, bump
//! polynomials, verification and CSV sweeps.
//!
//! Every JSON output is an [`Envelope`] holding the full effective
//! [`ExperimentConfig`] next to the result. Identical configurations give
//! byte-identical output; wall-clock data goes to a `<output>.meta.json`
//! side file.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

mod commands;

pub use commands::{Clause, PairData, PairDetails, VerifyResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Grid,
    Random,
    Onedim,
    Cube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeArg {
    Near,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseArg {
    WorstCaseSign,
    UniformDisk,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconMode {
    Signed,
    Distribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Wasserstein,
    Hh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Grid,
    Onedim,
    Bump,
    Cube,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub construction: Construction,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub epsilon: f64,
    /// Root order at 1 for the cube construction; skips the range check on epsilon.
    #[arg(long)]
    pub k: Option<usize>,
    /// Points per side for the random construction.
    #[arg(long)]
    pub m: Option<usize>,
    /// Jackson degree for the random construction.
    #[arg(long)]
    pub n: Option<u32>,
    /// Exponential-sum threshold for the random construction.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub retries: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReconArgs {
    /// Comb file or pair file; a random signal is drawn when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Side::First)]
    pub which: Side,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub spikes: usize,
    /// Draw a nonnegative random signal.
    #[arg(long)]
    pub positive: bool,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub bandlimit: Option<u32>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub jackson_n: Option<u32>,
    #[arg(long)]
    pub grid_k: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum, default_value_t = NoiseArg::WorstCaseSign)]
    pub noise: NoiseArg,
    /// Noise modulus; defaults to kappa.
    #[arg(long)]
    pub noise_level: Option<f64>,
    #[arg(long, value_enum, default_value_t = ReconMode::Signed)]
    pub mode: ReconMode,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DistanceArgs {
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Pair file from `gen`.
    #[arg(long, conflicts_with_all = ["first", "second"])]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "second")]
    pub first: Option<PathBuf>,
    #[arg(long, requires = "first")]
    pub second: Option<PathBuf>,
    #[arg(long, default_value_t = 0.49)]
    pub eps_dist: f64,
    #[arg(long, default_value_t = 64)]
    pub center_grid: usize,
    #[arg(long, default_value_t = 256)]
    pub radius_grid: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BumpArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.49)]
    pub eps_dist: f64,
    #[arg(long, value_enum, default_value_t = RegimeArg::Far)]
    pub regime: RegimeArg,
    /// Run the pointwise checks and fail on any violation.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    /// Verify a stored pair instead of generating one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.49)]
    pub eps_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    #[arg(long, value_enum)]
    pub kind: ReportKind,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub d_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_values: Vec<f64>,
    #[arg(long, default_value_t = 0.49)]
    pub eps_dist: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Generate a hard instance pair.
    Gen(GenArgs),
    /// Reconstruct a comb from noisy low-frequency coefficients.
    Reconstruct(ReconArgs),
    /// Wasserstein or heavy-hitter distance between two combs.
    Distance(DistanceArgs),
    /// Build and check a bump polynomial.
    Bump(BumpArgs),
    /// Check every clause of a construction.
    Verify(VerifyArgs),
    /// Parameter sweep as CSV.
    Report(ReportArgs),
}

#[derive(Debug, Parser)]
#[command(name = "torus-sr", version, about = "Super-resolution experiments on the torus")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

/// One fully resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub command: Command,
}

impl ExperimentConfig {
    pub fn parse_from<I, T>(argv: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = Cli::try_parse_from(argv)?;
        Ok(Self {
            seed: cli.seed,
            output: cli.output,
            format: cli.format,
            command: cli.command,
        })
    }
}

/// JSON artifact: the configuration that produced it plus the result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub config: ExperimentConfig,
    pub result: T,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Failed(m) => write!(f, "error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Verification(_) | CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl From<torus_sr::Error> for CliError {
    fn from(e: torus_sr::Error) -> Self {
        use torus_sr::Error as E;
        match e {
            E::OutOfRange(_)
            | E::DimensionMismatch { .. }
            | E::NotNormalized(_)
            | E::NotDistribution(_)
            | E::IndexCapExceeded { .. }
            | E::EmptyComb
            | E::ZeroMass => CliError::Usage(e.to_string()),
            E::Verification(_) | E::RetriesExhausted { .. } => CliError::Verification(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("malformed input: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

/// Result of one command: output bytes, summary line, and whether every check passed.
pub struct Outcome {
    pub body: Vec<u8>,
    pub summary: String,
    pub passed: bool,
}

/// Parse `argv`, run the command, write outputs, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match ExperimentConfig::parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// Run a parsed configuration.
pub fn execute(config: &ExperimentConfig) -> Result<i32, CliError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let outcome = commands::dispatch(config)?;
    match &config.output {
        Some(path) => {
            std::fs::write(path, &outcome.body)?;
            write_meta(path, started, clock.elapsed().as_secs_f64())?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&outcome.body)?;
            out.flush()?;
        }
    }
    eprintln!("{}", outcome.summary);
    Ok(if outcome.passed { EXIT_OK } else { EXIT_FAILED })
}

fn write_meta(path: &Path, started: SystemTime, elapsed: f64) -> Result<(), CliError> {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    let unix = started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let meta = serde_json::json!({
        "started_unix": unix,
        "elapsed_seconds": elapsed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    std::fs::write(PathBuf::from(name), serde_json::to_vec_pretty(&meta)?)?;
    Ok(())
}
