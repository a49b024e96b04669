//! `scds`: batch front end for the dominant-set clustering pipeline.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scds::LabelingMethod;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "scds",
    version,
    about = "Dominant-set clustering of embedding vectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate labeled embeddings around orthogonal centroids.
    Synth(SynthArgs),
    /// Cluster an embedding file and write the clustering as JSON.
    Cluster(ClusterArgs),
    /// Score a clustering against the labels in an embedding file.
    Evaluate(EvaluateArgs),
    /// Estimate the number of clusters with the eigengap heuristic.
    EstimateK(EstimateArgs),
    /// Evaluate the dominant-set pipeline over a (theta, epsilon) grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// Dominant sets via replicator dynamics.
    Ds,
    /// Spherical k-means baseline.
    Kmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KFrom {
    Eigengap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Labeling {
    Max,
    Hungarian,
}

impl From<Labeling> for LabelingMethod {
    fn from(l: Labeling) -> Self {
        match l {
            Labeling::Max => LabelingMethod::Max,
            Labeling::Hungarian => LabelingMethod::Hungarian,
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Number of clusters (orthogonal centroids).
    #[arg(long)]
    clusters: usize,
    /// Points per cluster.
    #[arg(long)]
    points: usize,
    /// Embedding dimension; must be at least the number of clusters.
    #[arg(long)]
    dim: usize,
    /// Standard deviation of the per-coordinate Gaussian noise.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Seed for the ChaCha8 generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rotate the centroids by a seeded random orthogonal matrix.
    #[arg(long)]
    rotate: bool,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// Embedding CSV with header `id,label,f0,...`.
    #[arg(long)]
    input: PathBuf,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Algorithm::Ds)]
    algorithm: Algorithm,
    /// Relative support threshold in [0, 1).
    #[arg(long, default_value_t = scds::dominant_sets::DEFAULT_THETA)]
    theta: f64,
    /// Convergence tolerance on the L2 step of the replicator dynamics.
    #[arg(long, default_value_t = scds::dominant_sets::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Iteration cap per dominant set [default: 10000] or per k-means run [default: 300].
    #[arg(long)]
    max_iters: Option<usize>,
    /// Neighbors used for the local scale of each point.
    #[arg(long, default_value_t = scds::affinity::DEFAULT_KNN)]
    knn: usize,
    /// Number of k-means clusters.
    #[arg(long, conflicts_with = "k_from")]
    k: Option<usize>,
    /// Derive the k-means cluster count from the affinity.
    #[arg(long, value_enum)]
    k_from: Option<KFrom>,
    /// k-means restarts.
    #[arg(long, default_value_t = scds::baselines::DEFAULT_RESTARTS)]
    restarts: usize,
    /// k-means seed; restart r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the affinity matrix as CSV.
    #[arg(long)]
    dump_affinity: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["clusters", "assignments"])))]
struct EvaluateArgs {
    /// Labeled embedding CSV providing the ground truth.
    #[arg(long)]
    input: PathBuf,
    /// Clustering JSON written by `scds cluster`.
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// External assignment CSV with header `id,cluster_id`.
    #[arg(long)]
    assignments: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Labeling::Hungarian)]
    labeling: Labeling,
    /// Emit the one-line `mr,ari,acp,n_clusters` row instead of JSON.
    #[arg(long)]
    csv: bool,
    /// Output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = scds::affinity::DEFAULT_KNN)]
    knn: usize,
    /// Output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Labeled embedding CSV.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated, strictly increasing theta values [default: 17 points from 0 to 0.9995].
    #[arg(long, value_delimiter = ',')]
    thetas: Option<Vec<f64>>,
    /// Comma-separated, strictly increasing epsilon values [default: 1e-11 to 1e-2 by decades].
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, default_value_t = scds::affinity::DEFAULT_KNN)]
    knn: usize,
    #[arg(long, default_value_t = scds::dominant_sets::DEFAULT_MAX_ITERATIONS)]
    max_iters: usize,
    #[arg(long, value_enum, default_value_t = Labeling::Hungarian)]
    labeling: Labeling,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result: Result<(), CliError> = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::EstimateK(a) => commands::estimate_k(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scds: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
