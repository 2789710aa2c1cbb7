//! The `teigen` command line.
//!
//! Every subcommand resolves its settings as flag > `--config` file >
//! built-in default, echoes the resolved values to stderr, and writes a
//! `manifest.json` plus a replayable `resolved.conf` next to its outputs.
//! Exit status is 0 when all outputs were written, 2 for configuration
//! errors and 1 for anything else.

mod commands;
pub mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::data::Label;
use crate::error::Error;
use crate::pipeline::Method;

#[derive(Debug, Parser)]
#[command(name = "teigen", version, about = "Transport eigenmaps: semi-supervised spectral embeddings")]
pub struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a point cloud and write coordinates, spectrum and manifest.
    Embed(EmbedArgs),
    /// Embed (or read an embedding) and run the 1-NN protocol.
    Classify(ClassifyArgs),
    /// Embed and classify once per value of a parameter grid.
    Sweep(SweepArgs),
    /// Run every method on the five-cluster demo dataset.
    Toy(ToyArgs),
    /// Check solvability of the metric equations for a velocity field.
    Fieldcheck(FieldcheckArgs),
}

/// Which CSV column holds the labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    None,
    Last,
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "last" => Ok(Self::Last),
            _ => s
                .parse()
                .map(Self::Index)
                .map_err(|_| format!("expected none, last or a column index, got {s:?}")),
        }
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => f.write_str("none"),
            Self::Last => f.write_str("last"),
            Self::Index(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Points as CSV, or a raw f32 cube (with `--gt`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Label file, one integer per point.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Label column of the CSV input: none, last or an index.
    #[arg(long)]
    pub label_column: Option<LabelColumn>,
    /// Ground-truth label image; switches `--input` to cube mode.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Rescale coordinates first: none, max-abs or unit-norm.
    #[arg(long)]
    pub scaling: Option<crate::data::Scaling>,
    /// Band indices to drop from a cube.
    #[arg(long, value_delimiter = ',')]
    pub remove_bands: Vec<usize>,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha_hat: Option<f64>,
    /// A class assumed known; repeat for several.
    #[arg(long)]
    pub known_class: Vec<Label>,
    /// Measure modifier for the matching `--known-class`.
    #[arg(long)]
    pub a_value: Vec<f64>,
    #[arg(long)]
    pub r_small: Option<f64>,
    #[arg(long)]
    pub r_big: Option<f64>,
    /// Share of each known class actually revealed.
    #[arg(long)]
    pub known_fraction: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Join disconnected kNN components instead of failing.
    #[arg(long)]
    pub auto_connect: bool,
    /// Largest n solved densely; above it the iterative solver runs.
    #[arg(long)]
    pub dense_limit: Option<usize>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write T, X and D as triplet files.
    #[arg(long)]
    pub dump_operator: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Treat the input as embedding coordinates and skip embedding.
    #[arg(long)]
    pub precomputed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    K,
    Sigma,
    M,
    AlphaHat,
    Beta,
    NoiseSigma,
    InfoFraction,
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.replace('_', "-").as_str() {
            "k" => Self::K,
            "sigma" => Self::Sigma,
            "m" => Self::M,
            "alpha-hat" => Self::AlphaHat,
            "beta" => Self::Beta,
            "noise-sigma" => Self::NoiseSigma,
            "info-fraction" => Self::InfoFraction,
            _ => {
                return Err(format!(
                    "unknown sweep parameter {s:?}; expected k, sigma, m, alpha-hat, beta, noise-sigma or info-fraction"
                ))
            }
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::K => "k",
            Self::Sigma => "sigma",
            Self::M => "m",
            Self::AlphaHat => "alpha-hat",
            Self::Beta => "beta",
            Self::NoiseSigma => "noise-sigma",
            Self::InfoFraction => "info-fraction",
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub param: Option<SweepParam>,
    /// Grid values; noise-sigma and info-fraction have built-in grids.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    /// Methods compared at every grid point (default: `--method`).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, Args)]
pub struct ToyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_per_cluster: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    /// TE treats the blue cluster as known with this measure modifier.
    #[arg(long)]
    pub te_a_blue: Option<f64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    Affine,
    Ratio,
}

impl FromStr for FieldMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "affine" => Ok(Self::Affine),
            "ratio" => Ok(Self::Ratio),
            _ => Err(format!("expected affine or ratio, got {s:?}")),
        }
    }
}

impl fmt::Display for FieldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Affine => "affine",
            Self::Ratio => "ratio",
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct FieldcheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Edge list, one `i j w` per line.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Node count when the edge list leaves trailing nodes isolated.
    #[arg(long)]
    pub n: Option<usize>,
    /// Measure modifiers, one per node.
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<FieldMode>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> crate::Result<()> {
    match cli.command {
        Command::Embed(a) => commands::embed(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Toy(a) => commands::toy(&a),
        Command::Fieldcheck(a) => commands::fieldcheck(&a),
    }
}

/// Entry point of the `teigen` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.root() {
                Error::Config { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
