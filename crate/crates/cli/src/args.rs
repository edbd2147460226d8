//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lrscov_core::estimators::ThresholdKind;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "lrscov",
    version,
    about = "Low-rank plus sparse covariance estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one estimator at fixed thresholds and write a JSON report.
    Estimate(EstimateArgs),
    /// Select thresholds over a grid by the MC criterion or cross-validation.
    Grid(GridArgs),
    /// Run simulation replicates and write metric tables.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Unalce,
    Alce,
    Poet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdArg {
    Soft,
    Hard,
    SoftCorr,
    HardCorr,
}

impl From<ThresholdArg> for ThresholdKind {
    fn from(t: ThresholdArg) -> Self {
        match t {
            ThresholdArg::Soft => ThresholdKind::Soft,
            ThresholdArg::Hard => ThresholdKind::Hard,
            ThresholdArg::SoftCorr => ThresholdKind::SoftCorrelation,
            ThresholdArg::HardCorr => ThresholdKind::HardCorrelation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionArg {
    Mc,
    Cv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthArg {
    /// A new ground truth for every replicate.
    Fresh,
    /// One ground truth shared by all replicates.
    Fixed,
}

/// Where the covariance comes from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// CSV file: a symmetric matrix, or observations in rows with `--data`.
    #[arg(long)]
    pub input: PathBuf,
    /// Treat the input as raw data and form the sample covariance.
    #[arg(long)]
    pub data: bool,
    /// Do not remove column means from raw data.
    #[arg(long, requires = "data")]
    pub no_center: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Relative convergence tolerance of the proximal solver.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Nuclear-norm threshold (alce, unalce).
    #[arg(long)]
    pub psi: Option<f64>,
    /// Off-diagonal l1 threshold.
    #[arg(long)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Unalce)]
    pub method: MethodArg,
    /// Number of principal components kept by poet.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Residual thresholding rule of poet.
    #[arg(long, value_enum, default_value_t = ThresholdArg::Soft)]
    pub threshold: ThresholdArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON report path.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for `low_rank.csv`, `sparse.csv` and `sigma.csv`.
    #[arg(long)]
    pub components_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `a,b,...` or `min:max:count` (log-spaced). Ignored by poet.
    #[arg(long)]
    pub psi_grid: Option<String>,
    /// `a,b,...` or `min:max:count` (log-spaced).
    #[arg(long)]
    pub rho_grid: String,
    #[arg(long, value_enum, default_value_t = CriterionArg::Mc)]
    pub criterion: CriterionArg,
    /// Estimator refitted inside cross-validation; mc always uses unalce.
    #[arg(long, value_enum, default_value_t = MethodArg::Unalce)]
    pub method: MethodArg,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, value_enum, default_value_t = ThresholdArg::Soft)]
    pub threshold: ThresholdArg,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Shuffle rows with this seed before splitting into folds.
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON path for the selected pair.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV path for the per-pair table; defaults to `--out` with a `.csv` extension.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Reference setting 1..5; omit to give every field explicitly.
    #[arg(long)]
    pub setting: Option<u8>,
    /// Shrinks `p` and `n` of the setting by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Latent share of the total variance.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Condition number of the latent eigenvalues.
    #[arg(long)]
    pub cond: Option<f64>,
    /// Proportion of nonzero off-diagonal pairs in the sparse component.
    #[arg(long)]
    pub prop_s: Option<f64>,
    #[arg(long)]
    pub rho_corr: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated: alce, unalce, poet, poet-hard, poet-soft-corr, poet-hard-corr.
    #[arg(long, default_value = "unalce,poet")]
    pub methods: String,
    #[arg(long, value_enum, default_value_t = TruthArg::Fresh)]
    pub truth: TruthArg,
    /// Fixed thresholds on every replicate instead of grid selection.
    #[arg(long)]
    pub psi: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub poet_rho: Option<f64>,
    /// MC grid for alce/unalce when thresholds are not fixed.
    #[arg(long, default_value = "0.05:1:6")]
    pub psi_grid: String,
    #[arg(long, default_value = "0.005:0.2:6")]
    pub rho_grid: String,
    /// Cross-validation grid for the poet threshold.
    #[arg(long, default_value = "0.005:0.5:8")]
    pub poet_rho_grid: String,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}
