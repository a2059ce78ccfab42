//! `ibp`: ensembles of interacting Bessel processes and Dyson's model,
//! polynomial zeroes, limiting densities and Dunkl-kernel series.
//!
//! Exit codes: 0 success, 1 comparison outside tolerance, 2 invalid input,
//! 3 numerical failure.

mod commands;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numeric(_) | CliError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<ibp::Error> for CliError {
    fn from(e: ibp::Error) -> Self {
        use ibp::Error as E;
        match e {
            E::InvalidInput(_) | E::Domain(_) | E::Capacity { .. } => {
                CliError::Invalid(e.to_string())
            }
            E::NonConvergence(_)
            | E::Overflow(_)
            | E::StuckPath { .. }
            | E::TooManyStuckPaths { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "ibp",
    version,
    about = "Interacting Bessel processes: simulation and analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an ensemble and write hist.csv, finals.csv and manifest.txt.
    Simulate(SimulateArgs),
    /// Print zeroes of Laguerre or Hermite polynomials.
    Zeros(ZerosArgs),
    /// Tabulate a one-point density on a grid into density.csv.
    Density(DensityArgs),
    /// Distance between a histogram and a density on the same bin centers.
    Compare(CompareArgs),
    /// Evaluate the type-B generalized Bessel function series.
    Kernel(KernelArgs),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    #[value(name = "besselB")]
    BesselB,
    #[value(name = "dysonA")]
    DysonA,
}

/// Length unit dividing the positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    SqrtBetaT,
    SqrtNuT,
    SqrtBetaNuT,
    None,
}

impl ScaleArg {
    pub fn factor(self, beta: f64, nu: f64, t: f64) -> f64 {
        match self {
            ScaleArg::SqrtBetaT => (beta * t).sqrt(),
            ScaleArg::SqrtNuT => (nu * t).sqrt(),
            ScaleArg::SqrtBetaNuT => (beta * nu * t).sqrt(),
            ScaleArg::None => 1.0,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 2e-4)]
    pub dt: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated positions, `step:S` (x_i = i·S) or `centered:S`
    /// (x_i = (i − (N+1)/2)·S). Defaults to `step:0.01` for besselB and
    /// `centered:0.01` for dysonA.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    #[arg(long, value_enum, default_value_t = ScaleArg::SqrtBetaT)]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = 1e-2)]
    pub bin_width: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Laguerre,
    Hermite,
    SqrtLaguerre,
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityKind {
    /// Exact one-point density at β = 2 from the origin, native unit y.
    ExactBeta2,
    /// Large-β steady state, native unit √(βt).
    SteadyBeta,
    /// Large-ν steady state, native unit √(νt).
    SteadyNu,
    /// β-Laguerre eigenvalue density in λ = βu².
    LaguerreEnsemble,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub kind: DensityKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// `LO:HI:COUNT`; values are tabulated at the bin centers.
    #[arg(long)]
    pub grid: String,
    /// Unit of the tabulated variable; defaults to sqrt-beta-t for
    /// exact-beta2 and steady-beta, sqrt-beta-nu-t for steady-nu.
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
    /// Seed of the sampler used for N > 3.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 400_000)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L1,
    Sup,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub hist: PathBuf,
    #[arg(long)]
    pub density: PathBuf,
    #[arg(long, value_enum, default_value_t = NormArg::L1)]
    pub norm: NormArg,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LimitArg {
    Beta,
    Nu,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub max_degree: u32,
    /// Compare `gen_bessel_B(√p·x, y)/(2^N N!)` with the limit kernel for
    /// large p = β or p = ν.
    #[arg(long, value_enum)]
    pub limit: Option<LimitArg>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a).map(|_| true),
        Command::Zeros(a) => commands::zeros(&a).map(|_| true),
        Command::Density(a) => commands::density(&a).map(|_| true),
        Command::Compare(a) => commands::compare(&a),
        Command::Kernel(a) => commands::kernel(&a).map(|_| true),
        Command::Replay(a) => {
            let cli = manifest::replay_command(&a.manifest, &a.out)?;
            run(cli)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
