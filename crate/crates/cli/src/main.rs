//! `jacobi-heat` command-line front end.

mod commands;
mod output;
mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jacobi_heat::semigroup::Subordination;
use jacobi_heat::JacobiParams;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

/// Fixed default for every randomized command.
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "jacobi-heat",
    version,
    about = "Heat and Poisson semigroups of Jacobi recurrence matrices"
)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Tabulate K_t(m,n) for m, n ≤ mmax.
    ///
    /// CSV columns: t,m,n,value (one row per time and index pair).
    Kernel(commands::KernelArgs),
    /// Apply W_t to a finite sequence.
    ///
    /// CSV columns: t,n,value (n from 0 to --nmax).
    Apply(commands::ApplyArgs),
    /// Apply P_t to a finite sequence.
    ///
    /// CSV columns: t,n,value (n from 0 to --nmax).
    Poisson(commands::PoissonArgs),
    /// Maximal functions W_*f and P_*f over a logarithmic time grid.
    ///
    /// CSV columns: n,heat,poisson.
    Maximal(commands::MaximalArgs),
    /// Run an invariant suite; exits 3 on any violation.
    ///
    /// CSV columns: check,value,limit,passed.
    Verify(verify::VerifyArgs),
    /// Linearization coefficients c(k; m, n) of p_m p_n for m, n ≤ mmax.
    ///
    /// CSV columns: m,n,k,c.
    Linearize(commands::LinearizeArgs),
    /// Gauss–Jacobi nodes and weights.
    ///
    /// CSV columns: node,weight.
    Quadrature(commands::QuadratureArgs),
    /// Time kernel block evaluation (timings are not reproducible).
    ///
    /// CSV columns: t,size,seconds.
    Bench(commands::BenchArgs),
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ParamArgs {
    /// Jacobi exponent α > -1.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Jacobi exponent β > -1.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta: f64,
}

impl ParamArgs {
    pub fn params(&self) -> Result<JacobiParams, CliError> {
        JacobiParams::new(self.alpha, self.beta).map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; a `<out>.meta.json` sidecar echoes the flags. Stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubordinationKind {
    /// Trapezoid rule in ln u.
    Trapezoid,
    /// Generalized Gauss–Laguerre rule.
    Laguerre,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct SubordinationArgs {
    #[arg(long, value_enum, default_value_t = SubordinationKind::Trapezoid)]
    pub subordination: SubordinationKind,
    /// Step of the trapezoid rule in ln u.
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
    /// Node count of the Gauss–Laguerre rule.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
}

impl SubordinationArgs {
    pub fn rule(&self) -> Subordination {
        match self.subordination {
            SubordinationKind::Trapezoid => Subordination::LogTrapezoid { step: self.step },
            SubordinationKind::Laguerre => Subordination::GaussLaguerre { nodes: self.nodes },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Library(#[from] jacobi_heat::Error),
    #[error("{0}")]
    Violation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Library(e) if e.is_numerical() => 2,
            CliError::Library(_) => 1,
            CliError::Violation(_) => 3,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let meta = serde_json::to_value(cli).expect("flags serialize");
    match &cli.command {
        Command::Kernel(a) => commands::kernel(a, &meta),
        Command::Apply(a) => commands::apply(a, &meta),
        Command::Poisson(a) => commands::poisson(a, &meta),
        Command::Maximal(a) => commands::maximal(a, &meta),
        Command::Verify(a) => verify::run(a, &meta),
        Command::Linearize(a) => commands::linearize(a, &meta),
        Command::Quadrature(a) => commands::quadrature(a, &meta),
        Command::Bench(a) => commands::bench(a, &meta),
    }
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
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
