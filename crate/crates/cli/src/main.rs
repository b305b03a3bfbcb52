//! `docpriv`: obfuscate bag-of-words documents with metric differential
//! privacy, compute Word Mover's Distances, sample noise and verify the
//! privacy guarantee on small one-dimensional vocabularies.

mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "docpriv",
    version,
    about = "Metric differential privacy for text documents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Obfuscate a corpus (one document per line).
    Obfuscate(ObfuscateArgs),
    /// Word Mover's Distance between two documents.
    Wmd(WmdArgs),
    /// Draw n-dimensional Laplace noise samples.
    Sample(SampleArgs),
    /// Check the privacy guarantee on a 1-D vocabulary.
    Verify(VerifyArgs),
    /// Snap a vector to its nearest vocabulary word.
    Nearest(NearestArgs),
}

#[derive(clap::Args, Debug)]
pub struct ObfuscateArgs {
    /// Embedding table: `<token> <f1> ... <fk>` per line.
    #[arg(long, value_name = "PATH")]
    pub embeddings: PathBuf,
    /// Privacy parameter, per unit of Euclidean distance.
    #[arg(long)]
    pub epsilon: f64,
    /// Base seed; document i uses seed + i. A random seed is drawn and printed if omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of words in every output document.
    #[arg(long, value_name = "M")]
    pub length: usize,
    /// Stopword list, one token per line.
    #[arg(long, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,
    /// Fail on out-of-vocabulary words instead of skipping them.
    #[arg(long)]
    pub strict_oov: bool,
    /// Keep token case.
    #[arg(long)]
    pub no_lowercase: bool,
    /// Input corpus; stdin if omitted.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output corpus; stdout if omitted.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Per-document JSON-lines report.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    /// Assignment for equal lengths, transportation simplex otherwise.
    Auto,
    Lp,
    Assignment,
}

#[derive(clap::Args, Debug)]
pub struct WmdArgs {
    #[arg(long, value_name = "PATH")]
    pub embeddings: PathBuf,
    /// First document (whitespace-separated words).
    pub first: PathBuf,
    /// Second document.
    pub second: PathBuf,
    #[arg(long, value_enum, default_value_t = Solver::Auto)]
    pub solver: Solver,
    /// Also print the optimal flow matrix.
    #[arg(long)]
    pub flow: bool,
    #[arg(long)]
    pub no_lowercase: bool,
}

#[derive(clap::Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub epsilon: f64,
    /// Dimension of the noise; required unless --center is given.
    #[arg(long, value_name = "N")]
    pub dim: Option<usize>,
    /// Comma-separated center vector; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub center: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    /// Embedding table; must be one-dimensional for exact checks.
    #[arg(long, value_name = "PATH")]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// Check every document of this length over the vocabulary.
    #[arg(long, value_name = "L", conflicts_with = "docs")]
    pub length: Option<usize>,
    /// Check these equal-length documents (one per line).
    #[arg(long, value_name = "PATH")]
    pub docs: Option<PathBuf>,
    /// Multiply the allowed bound; values below 1 act as a negative control.
    #[arg(long, default_value_t = 1.0)]
    pub bound_scale: f64,
    /// Estimate word distributions with this many trials instead; any dimension.
    #[arg(long, value_name = "TRIALS", conflicts_with_all = ["length", "docs"])]
    pub monte_carlo: Option<usize>,
    /// Seed for --monte-carlo.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(clap::Args, Debug)]
pub struct NearestArgs {
    #[arg(long, value_name = "PATH")]
    pub embeddings: PathBuf,
    /// Vector components, space- or comma-separated.
    #[arg(required = true, allow_hyphen_values = true, value_delimiter = ',')]
    pub vector: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Obfuscate(a) => commands::obfuscate(a),
        Command::Wmd(a) => commands::wmd(a),
        Command::Sample(a) => commands::sample(a),
        Command::Verify(a) => commands::verify(a),
        Command::Nearest(a) => commands::nearest(a),
    };
    match outcome {
        Ok(status) => status.into(),
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.status.into()
        }
    }
}
