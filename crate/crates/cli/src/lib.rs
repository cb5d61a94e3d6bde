//! Command-line front-end for `mlrfit`.
//!
//! Commands:
//!
//! - `generate`: draw a synthetic dataset and write it with its ground truth,
//! - `fit`: run EM or ADMM on a dataset file and write a result file,
//! - `benchmark`: run a paired grid from a TOML config and write the per-cell
//!   CSV, summaries, timing histograms and t-tests,
//! - `report`: rebuild the derived files from an existing per-cell CSV,
//! - `plot`: render a histogram CSV as SVG.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for file and solver errors.

pub mod commands;
pub mod config;
pub mod dataset_io;
pub mod emit;
pub mod error;
pub mod format;
pub mod manifest;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlrfit::em::DEFAULT_LP_CAP;
use mlrfit::model::{DEFAULT_ITERATIONS, DEFAULT_RHO};
use mlrfit::{CandidateRule, NoiseKind};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "mlrfit", version, about = "Mixed linear regression by EM and ADMM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic dataset with known coefficients.
    Generate(GenerateArgs),
    /// Fit a mixture to a dataset file.
    Fit(FitArgs),
    /// Run paired EM/ADMM experiments over a grid.
    Benchmark(BenchmarkArgs),
    /// Rebuild summaries, histograms and t-tests from a per-cell CSV.
    Report(ReportArgs),
    /// Render a timing histogram CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Laplacian,
}

impl From<NoiseArg> for NoiseKind {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Gaussian => NoiseKind::Gaussian,
            NoiseArg::Laplacian => NoiseKind::Laplacian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Em,
    Admm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LadPathArg {
    Auto,
    Lp,
    Irls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CandidateRuleArg {
    Filtered,
    Unconditional,
}

impl From<CandidateRuleArg> for CandidateRule {
    fn from(r: CandidateRuleArg) -> Self {
        match r {
            CandidateRuleArg::Filtered => CandidateRule::Filtered,
            CandidateRuleArg::Unconditional => CandidateRule::Unconditional,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of components.
    #[arg(long)]
    pub k: usize,
    /// Covariate dimension.
    #[arg(long)]
    pub d: usize,
    /// Number of samples.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub noise: NoiseArg,
    /// Noise standard deviation.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub seed: u64,
    /// Dataset file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long, value_enum)]
    pub noise: NoiseArg,
    /// Number of components to fit.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub iters: usize,
    /// Seed of the random starting coefficients.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// ADMM penalty parameter.
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// Noise standard deviation; defaults to the dataset header value.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Laplacian EM M-step solver.
    #[arg(long, value_enum, default_value_t = LadPathArg::Auto)]
    pub lad_path: LadPathArg,
    /// Largest N for which `--lad-path auto` uses the LP path.
    #[arg(long, default_value_t = DEFAULT_LP_CAP)]
    pub lp_cap: usize,
    /// Laplacian ADMM candidate selection.
    #[arg(long, value_enum, default_value_t = CandidateRuleArg::Filtered)]
    pub candidate_rule: CandidateRuleArg,
    /// Dataset file to fit.
    #[arg(long)]
    pub data: PathBuf,
    /// Result file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Worker threads; defaults to MLRFIT_WORKERS or the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Per-cell CSV written by `benchmark`.
    #[arg(long)]
    pub cells: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Histogram CSV (`bin_lo,bin_hi,count`).
    #[arg(long)]
    pub input: PathBuf,
    /// SVG file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "EM time - ADMM time (s)")]
    pub title: String,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
        Command::Report(a) => commands::report(&a),
        Command::Plot(a) => commands::plot(&a),
    }
}

/// Parses `args` (program name first) and runs the command. Help and version
/// requests are returned as `Ok` with the text to print.
pub fn run_args<I, T>(args: I) -> CliResult<Option<String>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli).map(|()| None),
        Err(e) if !e.use_stderr() => Ok(Some(e.to_string())),
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}
