//! `l1l2`: generate instances, run the solvers, certify solutions and run sweeps.
//!
//! Exit codes: 0 on success, 1 on malformed input or any other error, 2 when a solver
//! stopped at its iteration cap.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "l1l2", version, about = "Sparse recovery with the L1/L2 ratio")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON object of flag values; flags on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a sensing matrix, sparse truth and observation as CSV plus metadata JSON.
    Gen(GenArgs),
    /// Solve `min γ·ratio(x) + ½‖Ax − b‖²` for CSV inputs.
    Solve(SolveArgs),
    /// Success-rate sweep over sparsity levels.
    Bench(BenchArgs),
    /// Synthetic DOAS dictionary fit.
    Doas(DoasArgs),
    /// Evaluate the proximal operator of the ratio.
    Prox(ProxArgs),
    /// Run one of the certificate checks.
    Certify(CertifyArgs),
}

pub const SUBCOMMANDS: [&str; 6] = ["gen", "solve", "bench", "doas", "prox", "certify"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Dct,
    Gauss,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Nonneg,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Support,
    Localsparse,
    Recovery,
    Ssp,
    Gammabound,
}

#[derive(Args, Debug, Clone)]
pub struct MatrixArgs {
    #[arg(long, value_enum, default_value = "dct")]
    pub kind: Kind,
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// DCT coherence parameter.
    #[arg(long = "F", default_value_t = 10.0)]
    pub f: f64,
    /// Gaussian row correlation.
    #[arg(long, default_value_t = 0.8)]
    pub corr: f64,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    /// Nonzeros in the ground truth.
    #[arg(long, default_value_t = 5)]
    pub s: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving A.csv, x.csv, b.csv and meta.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value = "admm")]
    pub solver: String,
    #[arg(long, default_value_t = 0.025)]
    pub beta: f64,
    /// Forward-backward step: a number or `auto` for 0.9/L.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    /// Stopping tolerance; defaults to 1e-6 for noiseless data and 0.01σ otherwise.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap as a multiple of n.
    #[arg(long, default_value_t = 5)]
    pub kmax_mult: usize,
    #[arg(long, default_value = "rand")]
    pub init: String,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Sensing matrix CSV.
    #[arg(long)]
    pub a: PathBuf,
    /// Observation CSV.
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub gamma: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Noise level used for the default tolerance.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ground truth CSV; adds relative error and outcome class to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
    pub sparsities: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "admm")]
    pub solvers: Vec<String>,
    /// Defaults to 1e-6 for noiseless sweeps and 1e-3 otherwise.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0.025)]
    pub beta: f64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 5)]
    pub kmax_mult: usize,
    #[arg(long, default_value = "rand")]
    pub init: String,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Per-trial CSV.
    #[arg(long, default_value = "trials.csv")]
    pub out_csv: PathBuf,
    /// Aggregate JSON; stdout when absent.
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DoasArgs {
    #[arg(long, default_value_t = 3)]
    pub gases: usize,
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    #[arg(long, default_value_t = 21)]
    pub k: usize,
    #[arg(long, default_value_t = 21)]
    pub l: usize,
    #[arg(long, default_value_t = 0.0)]
    pub std: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "admm,nnl1")]
    pub solvers: Vec<String>,
    #[arg(long, default_value_t = commands::DOAS_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = commands::DOAS_BETA)]
    pub beta: f64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub kmax_mult: usize,
    /// Start of the ratio solver; `l1` warm-starts from the NNL1 solution.
    #[arg(long, default_value = "l1")]
    pub init: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ProxArgs {
    /// Comma-separated entries of q.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required_unless_present = "q_file"
    )]
    pub q: Vec<f64>,
    /// CSV file holding q.
    #[arg(long, conflicts_with = "q")]
    pub q_file: Option<PathBuf>,
    #[arg(long)]
    pub rho: f64,
    /// Drop the nonnegativity constraint.
    #[arg(long)]
    pub free: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Point to certify: a solver iterate, or the candidate for `recovery`.
    #[arg(long)]
    pub x: Option<PathBuf>,
    /// Absolute singular-value threshold; relative 1e-8 when absent.
    #[arg(long)]
    pub sv_tol: Option<f64>,
    #[arg(long, value_enum, default_value = "nonneg")]
    pub domain: DomainArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Noise bound for `gammabound`.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Column count for `gammabound`; taken from `--a` when absent.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse(args: Vec<OsString>) -> anyhow::Result<Cli> {
    let args = match config::config_path(&args) {
        Some(path) => {
            let tokens = config::config_tokens(path.as_ref())?;
            config::merge(args, tokens, &SUBCOMMANDS)
        }
        None => args,
    };
    Ok(Cli::try_parse_from(args)?)
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            if let Some(ce) = e.downcast_ref::<clap::Error>() {
                if !ce.use_stderr() {
                    let _ = ce.print();
                    return ExitCode::SUCCESS;
                }
                let _ = ce.print();
            } else {
                eprintln!("error: {e:#}");
            }
            return ExitCode::from(1);
        }
    };
    match commands::run(cli.command) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
