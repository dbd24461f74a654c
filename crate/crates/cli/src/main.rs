mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geodesic_forest::data::CoordSystem;
use geodesic_forest::eval::{ModelKind, PredictorSpec, SweepAxis};
use geodesic_forest::tree::{Impurity, MaxFeatures, MidpointMode};
use geodesic_forest::{GeometryKind, Task};

#[derive(Debug, Parser)]
#[command(name = "geodesic-forest", version, about = "Decision trees and random forests on the hyperboloid")]
pub struct Cli {
    /// Worker threads for forest training; defaults to all cores.
    #[arg(long, global = true, env = "GEODESIC_FOREST_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a wrapped-Gaussian mixture on the hyperboloid.
    Generate(GenerateArgs),
    /// Train a tree or forest.
    Fit(FitArgs),
    /// Predict labels (and probabilities) for a dataset.
    Predict(PredictArgs),
    /// Cross-validate one or more predictors with paired t-tests.
    Evaluate(EvaluateArgs),
    /// Time and score a predictor over a grid of one hyperparameter.
    Sweep(SweepArgs),
    /// Export decision boundaries and a class grid of a 2-D tree.
    Boundaries(BoundariesArgs),
    /// Rewrite a dataset in another coordinate system.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct MixtureArgs {
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub curvature: f64,
    /// Covariance scale.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub mixture: MixtureArgs,
    #[arg(long, default_value_t = 800)]
    pub n: usize,
    /// Output CSV; `.gz` compresses.
    #[arg(long)]
    pub out: PathBuf,
}

/// How to read a dataset file.
#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Coordinate system of the file: hyperboloid, poincare or klein.
    #[arg(long, default_value = "hyperboloid")]
    pub coords: CoordSystem,
    #[arg(long, default_value_t = 1.0)]
    pub curvature: f64,
    /// Reject points off the manifold by more than 1e-9 instead of 1e-6.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// hyperboloid, or euclidean for axis-aligned CART on the raw columns.
    #[arg(long, default_value = "hyperboloid")]
    pub geometry: GeometryKind,
    /// tree or forest.
    #[arg(long, default_value = "tree", value_parser = parse_model_kind)]
    pub model: ModelKind,
    /// classification or regression.
    #[arg(long, default_value = "classification")]
    pub task: Task,
    #[arg(long, default_value_t = 3)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
    #[arg(long, default_value_t = 2)]
    pub min_samples_split: usize,
    /// gini, entropy or mse; defaults to gini, or mse for regression.
    #[arg(long)]
    pub impurity: Option<Impurity>,
    /// geodesic or naive.
    #[arg(long, default_value = "geodesic")]
    pub midpoint: MidpointMode,
    /// all, sqrt or a count.
    #[arg(long, default_value = "all")]
    pub max_features: MaxFeatures,
    #[arg(long, default_value_t = 12)]
    pub trees: usize,
    #[arg(long)]
    pub no_bootstrap: bool,
    #[arg(long)]
    pub hard_vote: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Coordinate system of the data file.
    #[arg(long, default_value = "hyperboloid")]
    pub coords: CoordSystem,
    /// Predictions CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Predictor spec: a preset (hyperdt, hyperrf, dt, rf) followed by
    /// key=value overrides, e.g. `hyperrf,trees=24,name=big`. Repeatable.
    #[arg(long = "predictor", value_parser = parse_predictor, default_values = ["hyperdt", "dt"])]
    pub predictors: Vec<PredictorSpec>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Comma-separated cross-validation seeds.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9")]
    pub seeds: Vec<u64>,
    /// Directory for cv.csv, summary.json and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SweepArgs {
    /// n_samples, dim, n_trees or max_depth.
    #[arg(long)]
    pub axis: SweepAxis,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, value_parser = parse_predictor, default_value = "hyperrf")]
    pub predictor: PredictorSpec,
    #[command(flatten)]
    pub mixture: MixtureArgs,
    /// Samples per trial when not sweeping n_samples.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Output JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct BoundariesArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = geodesic_forest::eval::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct ConvertArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "hyperboloid")]
    pub from: CoordSystem,
    #[arg(long)]
    pub to: CoordSystem,
    #[arg(long, default_value_t = 1.0)]
    pub curvature: f64,
    /// Label column holds real-valued targets.
    #[arg(long)]
    pub regression: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_predictor(s: &str) -> Result<PredictorSpec, String> {
    s.parse().map_err(|e: geodesic_forest::Error| e.to_string())
}

fn parse_model_kind(s: &str) -> Result<ModelKind, String> {
    match s {
        "tree" => Ok(ModelKind::Tree),
        "forest" => Ok(ModelKind::Forest),
        other => Err(format!("expected tree or forest, got {other:?}")),
    }
}

/// An error in how the command was invoked rather than in running it.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
