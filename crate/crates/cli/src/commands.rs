//! Tabulation commands.

use crate::output::emit;
use crate::{CliError, OutputArgs, ParamArgs, SubordinationArgs};
use clap::Args;
use jacobi_heat::kernel::{heat_kernel_block, linearization_coefficients, DEFAULT_KERNEL_TOL};
use jacobi_heat::quadrature::build_gauss_jacobi_rule;
use jacobi_heat::semigroup::{
    apply_heat, apply_poisson, maximal_heat_profile, maximal_poisson_profile, TimeGrid,
};
use jacobi_heat::FiniteSequence;
use serde::Serialize;
use std::time::Instant;

fn check_times(times: &[f64]) -> Result<(), CliError> {
    if times.is_empty() {
        return Err(CliError::Validation("--t needs at least one time".into()));
    }
    match times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        Some(t) => Err(CliError::Validation(format!(
            "time {t} must be finite and non-negative"
        ))),
        None => Ok(()),
    }
}

fn sequence(values: &[f64]) -> Result<FiniteSequence, CliError> {
    if values.is_empty() {
        return Err(CliError::Validation("--f needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Validation("--f values must be finite".into()));
    }
    Ok(FiniteSequence::new(values.to_vec()))
}

/// Output range `0..=nmax`, at least the input support.
fn output_range(f: &FiniteSequence, nmax: Option<usize>) -> Result<usize, CliError> {
    let nmax = nmax.unwrap_or(f.support() + 10);
    if nmax < f.support() {
        return Err(CliError::Validation(format!(
            "--nmax {nmax} is below the support {} of --f",
            f.support()
        )));
    }
    Ok(nmax)
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub mmax: usize,
    /// Column range (default: --mmax).
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Absolute convergence tolerance of the quadrature.
    #[arg(long, default_value_t = DEFAULT_KERNEL_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct KernelRow {
    t: f64,
    m: usize,
    n: usize,
    value: f64,
}

pub fn kernel(args: &KernelArgs, meta: &serde_json::Value) -> Result<(), CliError> {
    let params = args.params.params()?;
    check_times(&args.t)?;
    let nmax = args.nmax.unwrap_or(args.mmax);
    let mut rows = Vec::new();
    for &t in &args.t {
        let block = heat_kernel_block(params, t, args.mmax + 1, nmax + 1, args.tol)?;
        for m in 0..=args.mmax {
            for n in 0..=nmax {
                rows.push(KernelRow {
                    t,
                    m,
                    n,
                    value: block.get(m, n),
                });
            }
        }
    }
    emit(&rows, &args.output, meta)
}

#[derive(Serialize)]
struct ValueRow {
    t: f64,
    n: usize,
    value: f64,
}

fn value_rows(t: f64, u: &FiniteSequence, nmax: usize) -> impl Iterator<Item = ValueRow> + '_ {
    (0..=nmax).map(move |n| ValueRow {
        t,
        n,
        value: u.get(n),
    })
}

#[derive(Debug, Args, Serialize)]
pub struct ApplyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    /// Comma-separated values f(0), f(1), ...
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub f: Vec<f64>,
    /// Last output index (default: support + 10).
    #[arg(long)]
    pub nmax: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn apply(args: &ApplyArgs, meta: &serde_json::Value) -> Result<(), CliError> {
    let params = args.params.params()?;
    check_times(&args.t)?;
    let f = sequence(&args.f)?;
    let nmax = output_range(&f, args.nmax)?;
    let mut rows = Vec::new();
    for &t in &args.t {
        let u = apply_heat(params, t, &f, nmax)?;
        rows.extend(value_rows(t, &u, nmax));
    }
    emit(&rows, &args.output, meta)
}

#[derive(Debug, Args, Serialize)]
pub struct PoissonArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    /// Comma-separated values f(0), f(1), ...
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub f: Vec<f64>,
    /// Last output index (default: support + 10).
    #[arg(long)]
    pub nmax: Option<usize>,
    #[command(flatten)]
    pub rule: SubordinationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn poisson(args: &PoissonArgs, meta: &serde_json::Value) -> Result<(), CliError> {
    let params = args.params.params()?;
    check_times(&args.t)?;
    let f = sequence(&args.f)?;
    let nmax = output_range(&f, args.nmax)?;
    let rule = args.rule.rule();
    rule.nodes()?;
    let mut rows = Vec::new();
    for &t in &args.t {
        let u = apply_poisson(params, t, &f, nmax, rule)?;
        rows.extend(value_rows(t, &u, nmax));
    }
    emit(&rows, &args.output, meta)
}

#[derive(Debug, Args, Serialize)]
pub struct MaximalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated values f(0), f(1), ...
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub f: Vec<f64>,
    /// Smallest grid time.
    #[arg(long, default_value_t = 1e-3)]
    pub tmin: f64,
    /// Largest grid time.
    #[arg(long, default_value_t = 1e4)]
    pub tmax: f64,
    /// Number of logarithmically spaced grid times.
    #[arg(long, default_value_t = 22)]
    pub points: usize,
    /// Last output index (default: support + 10).
    #[arg(long)]
    pub nmax: Option<usize>,
    #[command(flatten)]
    pub rule: SubordinationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct MaximalRow {
    n: usize,
    heat: f64,
    poisson: f64,
}

pub fn maximal(args: &MaximalArgs, meta: &serde_json::Value) -> Result<(), CliError> {
    let params = args.params.params()?;
    let f = sequence(&args.f)?;
    let nmax = output_range(&f, args.nmax)?;
    let grid = TimeGrid::logarithmic(args.tmin, args.tmax, args.points)?;
    let rule = args.rule.rule();
    rule.nodes()?;
    let heat = maximal_heat_profile(params, &f, &grid, nmax)?;
    let poisson = maximal_poisson_profile(params, &f, &grid, nmax, rule)?;
    let rows: Vec<MaximalRow> = (0..=nmax)
        .map(|n| MaximalRow {
            n,
            heat: heat.get(n),
            poisson: poisson.get(n),
        })
        .collect();
    emit(&rows, &args.output, meta)
}

#[derive(Debug, Args, Serialize)]
pub struct LinearizeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 6)]
    pub mmax: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct LinearizationRow {
    m: usize,
    n: usize,
    k: usize,
    c: f64,
}

pub fn linearize(args: &LinearizeArgs, meta: &serde_json::Value) -> Result<(), CliError> {
    let params = args.params.params()?;
    let mut rows = Vec::new();
    for m in 0..=args.mmax {
        for n in 0..=args.mmax {
            let row = linearization_coefficients(params, m, n)?;
            rows.extend((row.k_min()..=row.k_max()).map(|k| LinearizationRow {
                m,
                n,
                k,
                c: row.get(k),
            }));
        }
    }
    emit(&rows, &args.output, meta)
}

#[derive(Debug, Args, Serialize)]
pub struct QuadratureArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 16)]
    pub nodes: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct NodeRow {
    node: f64,
    weight: f64,
}

pub fn quadrature(args: &QuadratureArgs, meta: &serde_json::Value) -> Result<(), CliError> {
    let params = args.params.params()?;
    if args.nodes == 0 {
        return Err(CliError::Validation("--nodes must be positive".into()));
    }
    let rule = build_gauss_jacobi_rule(params, args.nodes)?;
    let rows: Vec<NodeRow> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&node, &weight)| NodeRow { node, weight })
        .collect();
    emit(&rows, &args.output, meta)
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_value = "0.5,10,100")]
    pub t: Vec<f64>,
    /// Comma-separated square block sizes.
    #[arg(long, value_delimiter = ',', default_value = "16,64,128")]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct BenchRow {
    t: f64,
    size: usize,
    seconds: f64,
}

pub fn bench(args: &BenchArgs, meta: &serde_json::Value) -> Result<(), CliError> {
    let params = args.params.params()?;
    check_times(&args.t)?;
    if args.sizes.contains(&0) {
        return Err(CliError::Validation("--sizes must be positive".into()));
    }
    let mut rows = Vec::new();
    for &t in &args.t {
        for &size in &args.sizes {
            let start = Instant::now();
            heat_kernel_block(params, t, size, size, DEFAULT_KERNEL_TOL)?;
            rows.push(BenchRow {
                t,
                size,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    emit(&rows, &args.output, meta)
}
