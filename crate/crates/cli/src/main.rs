//! `mcorder`: validation, spectra, variances and dominance checks for
//! reversible kernels stored in problem files.

mod commands;
mod demo;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcorder::dominance::TOL_POS;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "mcorder",
    version,
    about = "Efficiency ordering of reversible Markov kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every kernel for stochasticity, stationarity, reversibility and irreducibility.
    Validate(ValidateArgs),
    /// Eigenvalues of a kernel on mean-zero functions.
    Spectrum(SpectrumArgs),
    /// Asymptotic variance of an observable under a kernel.
    Variance(VarianceArgs),
    /// Efficiency (and optionally Peskun) dominance of P over Q.
    Compare(CompareArgs),
    /// Hasse diagram of efficiency dominance over a set of kernels.
    Order(OrderArgs),
    /// Batch-means estimates from simulated paths against the exact variance.
    Simulate(SimulateArgs),
    /// Write a built-in problem file.
    Demo(DemoArgs),
    /// Remove zero-mass states from a problem file.
    Prune(PruneArgs),
}

#[derive(Args, Serialize)]
pub struct ValidateArgs {
    pub file: PathBuf,
    /// Renormalize rows before checking.
    #[arg(long)]
    pub repair: bool,
}

#[derive(Args, Serialize)]
pub struct SpectrumArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub kernel: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Spectral,
    Autocov,
    Both,
}

#[derive(Args, Serialize)]
pub struct VarianceArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub observable: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Spectral)]
    pub method: MethodArg,
    /// Bound on the dropped autocovariance tail.
    #[arg(long, default_value_t = 1e-10)]
    pub tail_tol: f64,
}

#[derive(Args, Serialize)]
pub struct CompareArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
    /// Also run the entrywise Peskun check.
    #[arg(long)]
    pub peskun: bool,
    /// Positivity tolerance on the smallest eigenvalue of Q − P.
    #[arg(long, default_value_t = TOL_POS)]
    pub tol: f64,
    /// Skip the irreducibility requirement.
    #[arg(long)]
    pub unchecked: bool,
}

#[derive(Args, Serialize)]
pub struct OrderArgs {
    pub file: PathBuf,
    /// Comma-separated kernel names; all kernels when omitted.
    #[arg(long, value_delimiter = ',')]
    pub kernels: Vec<String>,
    /// Also write the `a > b` edge list here.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long, default_value_t = TOL_POS)]
    pub tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorArg {
    /// Non-overlapping batch means.
    Bm,
    /// Overlapping batch means.
    Obm,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub observable: String,
    /// Steps per replicate.
    #[arg(short = 'N', long = "steps", default_value_t = 100_000)]
    pub n_steps: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to ⌊√N⌋, rounded up to a multiple of the period.
    #[arg(long)]
    pub batch_len: Option<usize>,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Bm)]
    pub estimator: EstimatorArg,
    /// Write the first replicate's path here, one state index per line.
    #[arg(long)]
    pub path_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DemoArgs {
    #[command(subcommand)]
    pub which: Demo,
    /// Write the problem file here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum Demo {
    /// Two states, uniform π; one kernel per switching probability.
    TwoState {
        #[arg(long = "p", default_values_t = [0.25])]
        p: Vec<f64>,
    },
    /// Lazy walk on a cycle.
    CycleWalk {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
    },
    /// Metropolis–Hastings for a peaked target on a line.
    MhDiscrete {
        #[arg(long, default_value_t = 9)]
        n: usize,
        /// Target standard deviation; n/6 by default.
        #[arg(long)]
        width: Option<f64>,
    },
    /// Mixtures that are equal although one component pair is ordered backwards.
    MixtureCounterexample,
}

#[derive(Args)]
pub struct PruneArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit codes: 0 success or "dominates", 1 failure or error, 2 dominated,
/// 3 incomparable, 4 equal.
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Variance(a) => commands::variance(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Order(a) => commands::order(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Demo(a) => commands::demo(&a),
        Command::Prune(a) => commands::prune(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
