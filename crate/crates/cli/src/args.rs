use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "msbench", version, about = "Benchmark harness for MS/MS spectrum prediction")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Bin width in m/z.
    #[arg(long, global = true)]
    pub resolution: Option<f64>,
    /// Upper m/z bound; peaks at or above it are dropped.
    #[arg(long, global = true)]
    pub max_mz: Option<f64>,
    /// Coverage threshold on max-normalized intensities.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// TOML run configuration; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Primary output file (stdout when absent). Sidecars are written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assign molecules to train/val/test partitions.
    Split(SplitArgs),
    /// Distribution-shift diagnostics for a split.
    Diagnose(DiagnoseArgs),
    /// Write the binned ground truth of a dataset as a prediction file.
    Bin(BinArgs),
    /// Score predictions against ground truth spectra.
    Score(ScoreArgs),
    /// Rank candidate structures for each query spectrum.
    Retrieve(RetrieveArgs),
    /// Friedman / Wilcoxon-Holm comparison of models across conditions.
    Compare(CompareArgs),
    /// Nearest-neighbour reference predictor.
    Baseline(BaselineArgs),
    /// Fit metadata statistics and embed every record.
    Embed(EmbedArgs),
    /// Convert an MGF file into the native dataset TSV.
    ImportMgf(ImportArgs),
    /// Convert an MSP file into the native dataset TSV.
    ImportMsp(ImportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Random,
    Scaffold,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    pub strategy: StrategyArg,
    /// Train, val and test shares, comma separated.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    pub ratios: String,
}

#[derive(Debug, Args)]
pub struct FingerprintArgs {
    #[arg(long, default_value_t = 2)]
    pub radius: u32,
    #[arg(long, default_value_t = 2048)]
    pub bits: usize,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    pub dataset: PathBuf,
    /// Split file written by `split`.
    #[arg(long)]
    pub split: PathBuf,
    /// Tanimoto pairs sampled per distribution.
    #[arg(long, default_value_t = 1_000_000)]
    pub n_pairs: usize,
    #[command(flatten)]
    pub fp: FingerprintArgs,
}

#[derive(Debug, Args)]
pub struct BinArgs {
    pub dataset: PathBuf,
    /// Write comma-separated dense vectors instead of sparse pairs.
    #[arg(long)]
    pub dense: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MergeArg {
    Sum,
    Max,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    /// Query spectra in the native dataset layout. Rows sharing a
    /// `query_id` column value are merged into one query.
    pub queries: PathBuf,
    /// Candidate table with columns query_id, candidate_id, smiles.
    #[arg(long, conflicts_with = "compounds", required_unless_present = "compounds")]
    pub candidates: Option<PathBuf>,
    /// Compound table with columns compound_id, smiles; candidates are
    /// drawn by precursor mass.
    #[arg(long)]
    pub compounds: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub ppm: f64,
    #[arg(long, default_value_t = 10_000)]
    pub cap: usize,
    /// Candidate predictions keyed `query_id/candidate_id` or `candidate_id`.
    #[arg(long)]
    pub predictions: PathBuf,
    /// How spectra of one query acquired at several energies are combined.
    #[arg(long, value_enum, default_value = "sum")]
    pub merge: MergeArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Score matrix: `condition` column followed by one column per model.
    pub scores: PathBuf,
    #[arg(long, default_value_t = msbench_core::modelcomp::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Smaller scores are better.
    #[arg(long)]
    pub lower_better: bool,
    /// Write a critical difference diagram here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Training dataset supplying reference spectra.
    #[arg(long)]
    pub train: PathBuf,
    /// Dataset whose molecules need predictions.
    #[arg(long, required_unless_present = "candidates")]
    pub queries: Option<PathBuf>,
    /// Candidate table; predictions are keyed `query_id/candidate_id`.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[command(flatten)]
    pub fp: FingerprintArgs,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    pub dataset: PathBuf,
    /// Fit statistics on the train partition of this split only.
    #[arg(long, conflicts_with = "stats")]
    pub split: Option<PathBuf>,
    /// Reuse a statistics sidecar instead of fitting.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    pub input: PathBuf,
}
