use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gspam::sim::SnrReading;
use gspam::solver::Algorithm;
use gspam::SolverConfig;

#[derive(Debug, Parser)]
#[command(name = "gspam", version, about = "Group sparse additive models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a simulated train/validation/test triple.
    Simulate(SimulateArgs),
    /// Fit one model and write it to a model file.
    Fit(FitArgs),
    /// Predict responses for new covariates.
    Predict(PredictArgs),
    /// Fit a regularization path and select λ on validation data.
    Path(PathArgs),
    /// Test MSE and, given the true support, precision and recall.
    Eval(EvalArgs),
    /// Emit component curves and partial residuals as CSV.
    PlotComponents(PlotArgs),
    /// Repeat the simulation study and aggregate support and error statistics.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Backfit,
    Spam,
    Groupspam,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Backfit => Algorithm::Backfit,
            AlgorithmArg::Spam => Algorithm::Spam,
            AlgorithmArg::Groupspam => Algorithm::GroupSpam,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SnrArg {
    /// sd(signal) / σ = 3
    Standard,
    /// sd(signal) / σ² = 3
    Literal,
}

impl From<SnrArg> for SnrReading {
    fn from(s: SnrArg) -> Self {
        match s {
            SnrArg::Standard => SnrReading::Standard,
            SnrArg::Literal => SnrReading::Literal,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Number of λ values on the path.
    #[arg(long, default_value_t = 30)]
    pub grid_count: usize,
    /// Smallest λ as a fraction of λ_max.
    #[arg(long, default_value_t = 0.01)]
    pub grid_ratio: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Largest per-component change at which the outer sweeps stop.
    #[arg(long, default_value_t = 1e-4)]
    pub outer_tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_sweeps: usize,
    /// Relative accuracy of the within-group solve.
    #[arg(long, default_value_t = 1e-6)]
    pub inner_tol: f64,
}

impl SolverArgs {
    pub fn config(&self, lambda: f64) -> SolverConfig {
        SolverConfig {
            lambda,
            outer_tol: self.outer_tol,
            outer_max_iter: self.max_sweeps,
            inner_tol: self.inner_tol,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 150)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub p: usize,
    /// Correlation parameter; covariates have correlation t²/(1+t²).
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
    #[arg(long, value_enum, default_value_t = SnrArg::Standard)]
    pub snr: SnrArg,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Training CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Groups file; required for groupspam.
    #[arg(long)]
    pub groups: Option<PathBuf>,
    /// Penalty level, or `auto` to select it on --validation.
    #[arg(long)]
    pub lambda: String,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Groupspam)]
    pub algorithm: AlgorithmArg,
    /// Allow overlapping groups (groupspam only).
    #[arg(long)]
    pub overlap: bool,
    /// Validation CSV, used with `--lambda auto`.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV of covariates; a `y` column is ignored.
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PathArgs {
    /// Training CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub validation: PathBuf,
    #[arg(long)]
    pub groups: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Groupspam)]
    pub algorithm: AlgorithmArg,
    #[arg(long)]
    pub overlap: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory for `path.csv` and `model.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Test CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Also write the record to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// 1-based covariate indices; defaults to the active set.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<usize>,
    /// Points per curve, endpoints included.
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    /// Map each covariate's training range onto [0, 1].
    #[arg(long)]
    pub rescale: bool,
    /// Training CSV; when given, partial residuals are written too.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for `curves.csv` and `residuals.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[arg(long, default_value_t = 150)]
    pub n: usize,
    /// Covariate counts to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "200")]
    pub p: Vec<usize>,
    /// Correlation parameters to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SnrArg::Standard)]
    pub snr: SnrArg,
    /// Methods to compare, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "groupspam,spam")]
    pub methods: Vec<AlgorithmArg>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output directory for `table.csv` and `replicates.csv`.
    #[arg(long)]
    pub out: PathBuf,
}
