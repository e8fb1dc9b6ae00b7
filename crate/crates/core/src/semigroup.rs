//! The heat operator `W_t = e^{t𝒥}` and the Poisson operator `P_t` acting on
//! finite sequences, their maximal functions over time grids, the dense
//! matrix exponential of a truncated Jacobi matrix, and energy diagnostics for
//! the initial value problem `∂u/∂t = 𝒥u`.

use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::error::{Error, Result};
use crate::jacobi::{apply_delta, apply_jacobi_operator, CoefficientTable, JacobiParams};
use crate::kernel::{
    heat_kernel_block, heat_kernel_blocks_on_common_rule, KernelBlock, DEFAULT_KERNEL_TOL,
};
use crate::quadrature::{gauss_laguerre_rule, tridiagonal_eigen_full};
use crate::sequence::FiniteSequence;

/// Node count of the Gauss–Laguerre subordination rule.
pub const DEFAULT_LAGUERRE_NODES: usize = 64;
/// Step in `ln u` of the default subordination rule.
pub const DEFAULT_LOG_STEP: f64 = 0.25;
const LOG_RULE_LOWER: f64 = -74.0;
const LOG_RULE_UPPER: f64 = 3.75;
/// Step of the finite-difference checks in [`energy_checks`].
pub const FD_STEP: f64 = 1e-4;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "time t = {t} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Symmetric tridiagonal matrix with off-diagonal `a`, diagonal `b` and the
/// spectral shift `s⁺` that turns it into the generator `J - s⁺I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralJacobiMatrix {
    a: Vec<f64>,
    b: Vec<f64>,
    s_plus: f64,
}

impl GeneralJacobiMatrix {
    /// Diagonal `b` of length `cutoff + 1`; `a[n]` couples rows `n` and `n + 1`,
    /// so `a` has length `cutoff`. `s` is the supremum of the spectral support;
    /// the shift is `max(s, 0)`.
    pub fn new(a: Vec<f64>, b: Vec<f64>, s: f64) -> Result<Self> {
        if b.is_empty() || a.len() + 1 != b.len() {
            return Err(Error::invalid(format!(
                "need one more diagonal than off-diagonal entry, got {} and {}",
                b.len(),
                a.len()
            )));
        }
        if let Some((n, v)) = a
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
        {
            return Err(Error::invalid(format!(
                "a[{n}] = {v} must be positive and finite"
            )));
        }
        if let Some((n, v)) = b.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("b[{n}] = {v} must be finite")));
        }
        if !s.is_finite() {
            return Err(Error::invalid(format!(
                "spectral supremum {s} must be finite"
            )));
        }
        Ok(Self {
            a,
            b,
            s_plus: s.max(0.0),
        })
    }

    /// The Jacobi-polynomial recurrence matrix, whose spectrum fills `[-1, 1]`.
    pub fn from_params(params: JacobiParams, cutoff: usize) -> Self {
        let table = CoefficientTable::new(params, cutoff);
        Self {
            a: table.a()[..cutoff].to_vec(),
            b: table.b().to_vec(),
            s_plus: 1.0,
        }
    }

    /// Recurrence matrix of the discrete measure `Σ λ_i δ_{x_i}`, by Lanczos
    /// with full reorthogonalization. Needs at least `cutoff + 1` nodes; with
    /// exactly that many the spectrum of the matrix is the node set.
    pub fn from_discrete_measure(nodes: &[f64], weights: &[f64], cutoff: usize) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::invalid("nodes and weights differ in length"));
        }
        if nodes.len() < cutoff + 1 {
            return Err(Error::invalid(format!(
                "{} nodes cannot carry {} recurrence steps",
                nodes.len(),
                cutoff
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite())
            || nodes.iter().any(|x| !x.is_finite())
        {
            return Err(Error::invalid("weights must be positive and nodes finite"));
        }
        let mass: f64 = weights.iter().sum();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cutoff + 1);
        basis.push(weights.iter().map(|w| (w / mass).sqrt()).collect());
        let mut a = Vec::with_capacity(cutoff);
        let mut b = Vec::with_capacity(cutoff + 1);
        for k in 0..=cutoff {
            let q = &basis[k];
            let mut r: Vec<f64> = q.iter().zip(nodes).map(|(v, x)| v * x).collect();
            let bk: f64 = r.iter().zip(q).map(|(x, y)| x * y).sum();
            b.push(bk);
            if k == cutoff {
                break;
            }
            for _ in 0..2 {
                for prev in &basis {
                    let c: f64 = r.iter().zip(prev).map(|(x, y)| x * y).sum();
                    r.iter_mut().zip(prev).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::Degenerate(format!("Lanczos breakdown at step {k}")));
            }
            a.push(norm);
            basis.push(r.into_iter().map(|x| x / norm).collect());
        }
        let s = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self::new(a, b, s)
    }

    pub fn cutoff(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn s_plus(&self) -> f64 {
        self.s_plus
    }
}

/// Dense symmetric `size × size` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricMatrix {
    pub size: usize,
    pub values: Vec<f64>,
}

#[derive(Serialize)]
struct MatrixRow {
    row: usize,
    col: usize,
    value: f64,
}

impl SymmetricMatrix {
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.size + n]
    }

    /// `row,col,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in 0..self.size {
            for col in 0..self.size {
                writer.serialize(MatrixRow {
                    row,
                    col,
                    value: self.get(row, col),
                })?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}

/// `e^{t(J_N - s⁺I)}` for the leading `size × size` block `J_N`, through a
/// full eigendecomposition.
pub fn matrix_exponential_kernel(
    matrix: &GeneralJacobiMatrix,
    t: f64,
    size: usize,
) -> Result<SymmetricMatrix> {
    check_time(t)?;
    if size == 0 || size > matrix.cutoff() + 1 {
        return Err(Error::invalid(format!(
            "size {size} must lie in 1..={}",
            matrix.cutoff() + 1
        )));
    }
    let eig = tridiagonal_eigen_full(&matrix.b[..size], &matrix.a[..size - 1])?;
    let vectors = eig
        .vectors
        .as_ref()
        .expect("full eigendecomposition requested");
    let scale: Vec<f64> = eig
        .values
        .iter()
        .map(|l| (t * (l - matrix.s_plus)).exp())
        .collect();
    let mut values = vec![0.0; size * size];
    values
        .par_chunks_mut(size)
        .enumerate()
        .for_each(|(m, row)| {
            let vm = &vectors[m * size..(m + 1) * size];
            for (n, slot) in row.iter_mut().enumerate() {
                let (lo, hi) = if m <= n {
                    (vm, &vectors[n * size..(n + 1) * size])
                } else {
                    (&vectors[n * size..(n + 1) * size], vm)
                };
                *slot = (0..size).map(|k| lo[k] * scale[k] * hi[k]).sum();
            }
        });
    Ok(SymmetricMatrix { size, values })
}

/// `Σ_i λ_i e^{t(x_i - s⁺)} p_m(x_i) p_n(x_i)` for a discrete measure, with
/// `p_k` the orthonormal polynomials of `matrix` (built by
/// [`GeneralJacobiMatrix::from_discrete_measure`] on the same nodes).
pub fn discrete_measure_kernel(
    matrix: &GeneralJacobiMatrix,
    nodes: &[f64],
    weights: &[f64],
    t: f64,
    m: usize,
    n: usize,
) -> Result<f64> {
    check_time(t)?;
    let top = m.max(n);
    if top > matrix.cutoff() {
        return Err(Error::invalid(format!(
            "degree {top} beyond cutoff {}",
            matrix.cutoff()
        )));
    }
    let mass: f64 = weights.iter().sum();
    let p0 = 1.0 / mass.sqrt();
    let mut sum = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        let mut prev = 0.0;
        let mut cur = p0;
        let (mut pm, mut pn) = (if m == 0 { p0 } else { 0.0 }, if n == 0 { p0 } else { 0.0 });
        for k in 0..top {
            let below = if k > 0 { matrix.a[k - 1] * prev } else { 0.0 };
            let next = ((x - matrix.b[k]) * cur - below) / matrix.a[k];
            prev = cur;
            cur = next;
            if k + 1 == m {
                pm = cur;
            }
            if k + 1 == n {
                pn = cur;
            }
        }
        sum += w * (t * (x - matrix.s_plus)).exp() * pm * pn;
    }
    Ok(sum)
}

/// Strictly increasing non-negative times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("time grid is empty"));
        }
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(Error::invalid(format!(
                "grid time {t} must be finite and non-negative"
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid times must be strictly increasing"));
        }
        Ok(Self { times })
    }

    /// `count` logarithmically spaced times from `lo` to `hi` inclusive.
    pub fn logarithmic(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) || count < 2 {
            return Err(Error::invalid(format!(
                "log grid needs 0 < lo < hi and at least two points, got [{lo}, {hi}] x {count}"
            )));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (count - 1) as f64;
        let mut times: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
        times[0] = lo;
        times[count - 1] = hi;
        Self::new(times)
    }

    /// Inserts the geometric midpoint (arithmetic next to zero) between
    /// neighbours, keeping every original time.
    pub fn refined(&self) -> Self {
        let mut times = Vec::with_capacity(2 * self.times.len() - 1);
        for w in self.times.windows(2) {
            times.push(w[0]);
            times.push(if w[0] > 0.0 {
                (w[0] * w[1]).sqrt()
            } else {
                0.5 * w[1]
            });
        }
        times.push(*self.times.last().unwrap());
        Self { times }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

/// `support + ceil(10 √(t + 1)) + 40`.
pub fn default_truncation(support: usize, t: f64) -> usize {
    support + (10.0 * (t + 1.0).sqrt()).ceil() as usize + 40
}

fn check_truncation(f: &FiniteSequence, truncation: usize) -> Result<()> {
    if truncation < f.support() {
        return Err(Error::invalid(format!(
            "truncation {truncation} below the support {} of the input",
            f.support()
        )));
    }
    Ok(())
}

fn apply_block(block: &KernelBlock, f: &FiniteSequence) -> FiniteSequence {
    let out = (0..block.cols)
        .map(|n| (0..block.rows).map(|m| f.get(m) * block.get(m, n)).sum())
        .collect();
    FiniteSequence::new(out)
}

/// `W_t f(n) = Σ_m f(m) K_t(m, n)` for `n ≤ truncation`.
pub fn apply_heat(
    params: JacobiParams,
    t: f64,
    f: &FiniteSequence,
    truncation: usize,
) -> Result<FiniteSequence> {
    check_time(t)?;
    check_truncation(f, truncation)?;
    if t == 0.0 || f.is_zero() {
        return Ok(f.resized(truncation));
    }
    let block = heat_kernel_block(
        params,
        t,
        f.support() + 1,
        truncation + 1,
        DEFAULT_KERNEL_TOL,
    )?;
    Ok(apply_block(&block, f))
}

/// Quadrature for the subordination integral
/// `π^{-1/2} ∫_0^∞ e^{-u} u^{-1/2} g(u) du`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Subordination {
    /// Generalized Gauss–Laguerre in `u` with exponent `-1/2`. Converges
    /// slowly: the integrand varies on the scale `u ~ t²`, which the smallest
    /// nodes (about `1/nodes`) cannot resolve when `t` is small.
    GaussLaguerre { nodes: usize },
    /// Trapezoid rule in `z = ln u` over `[-74, 3.75]`, where the integrand
    /// `e^{-e^z} e^{z/2} g(e^z)` is analytic and decays at both ends; the
    /// dropped tails weigh below `1e-16` for any `|g| ≤ 1`.
    LogTrapezoid { step: f64 },
}

impl Default for Subordination {
    fn default() -> Self {
        Subordination::LogTrapezoid {
            step: DEFAULT_LOG_STEP,
        }
    }
}

impl Subordination {
    /// `(u_j, ω_j)` with `Σ ω_j g(u_j)` approximating the normalized integral.
    pub fn nodes(&self) -> Result<Vec<(f64, f64)>> {
        let scale = std::f64::consts::PI.sqrt().recip();
        match *self {
            Subordination::GaussLaguerre { nodes } => {
                let rule = gauss_laguerre_rule(-0.5, nodes)?;
                Ok(rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&u, &w)| (u, w * scale))
                    .collect())
            }
            Subordination::LogTrapezoid { step } => {
                if !(step > 0.0) || !(step <= 1.0) {
                    return Err(Error::invalid(format!(
                        "log step {step} must lie in (0, 1]"
                    )));
                }
                let count = ((LOG_RULE_UPPER - LOG_RULE_LOWER) / step).ceil() as usize;
                Ok((0..=count)
                    .map(|k| {
                        let z = LOG_RULE_UPPER - step * k as f64;
                        let u = z.exp();
                        (u, step * scale * (-u).exp() * (0.5 * z).exp())
                    })
                    .collect())
            }
        }
    }
}

/// Bound on the absolute error left by stopping the subordination sum early.
pub const SUBORDINATION_TAIL: f64 = 1e-17;
const SUBORDINATION_CHUNK: usize = 16;

/// `Σ_j ω_j K_{s_j}` with `s_j = t²/(4u_j)` over the nodes of `rule`, as a
/// `rows × cols` block. Nodes are taken in order of increasing `s`; the sum
/// stops once the remaining weight times `max_{m<rows} √K_s(m,m)` times
/// `l1_bound` is below [`SUBORDINATION_TAIL`]. That bound dominates every
/// `|K_s(m,n)|` (Cauchy–Schwarz) and does not increase with `s`, so sequences
/// with `‖f‖₁ ≤ l1_bound` lose at most that much per entry.
pub(crate) fn poisson_kernel_block(
    params: JacobiParams,
    t: f64,
    rows: usize,
    cols: usize,
    rule: Subordination,
    l1_bound: f64,
) -> Result<KernelBlock> {
    if cols < rows {
        return Err(Error::invalid(
            "Poisson block needs at least as many columns as rows",
        ));
    }
    let mut samples: Vec<(f64, f64)> = rule
        .nodes()?
        .into_iter()
        .map(|(u, w)| (t * t / (4.0 * u), w))
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut remaining: f64 = samples.iter().map(|s| s.1).sum();
    let mut values = vec![0.0; rows * cols];
    for chunk in samples.chunks(SUBORDINATION_CHUNK) {
        let blocks = chunk
            .par_iter()
            .map(|&(s, _)| heat_kernel_block(params, s, rows, cols, DEFAULT_KERNEL_TOL))
            .collect::<Result<Vec<_>>>()?;
        for (block, &(_, w)) in blocks.iter().zip(chunk) {
            for (slot, v) in values.iter_mut().zip(&block.values) {
                *slot += w * v;
            }
            remaining -= w;
        }
        let last = blocks.last().expect("chunks are non-empty");
        let bound = (0..rows)
            .map(|m| last.get(m, m).max(0.0).sqrt())
            .fold(0.0, f64::max);
        if remaining.max(0.0) * bound * l1_bound < SUBORDINATION_TAIL {
            break;
        }
    }
    Ok(KernelBlock {
        t,
        rows,
        cols,
        values,
    })
}

/// `P_t f = π^{-1/2} ∫_0^∞ e^{-u} u^{-1/2} W_{t²/(4u)} f du`, one heat
/// kernel block per node of `rule`.
pub fn apply_poisson(
    params: JacobiParams,
    t: f64,
    f: &FiniteSequence,
    truncation: usize,
    rule: Subordination,
) -> Result<FiniteSequence> {
    check_time(t)?;
    check_truncation(f, truncation)?;
    if t == 0.0 || f.is_zero() {
        return Ok(f.resized(truncation));
    }
    let l1: f64 = f.values().iter().map(|v| v.abs()).sum();
    let block = poisson_kernel_block(params, t, f.support() + 1, truncation + 1, rule, l1)?;
    Ok(apply_block(&block, f))
}

/// Maximum of `|g_t(n)|` over the grid and the limit `t → 0⁺`, which is
/// `|f(n)|` for both semigroups.
fn grid_maximum(
    f: &FiniteSequence,
    grid: &TimeGrid,
    truncation: usize,
    apply: impl Fn(f64) -> Result<FiniteSequence> + Sync,
) -> Result<FiniteSequence> {
    let profiles = grid
        .times()
        .par_iter()
        .map(|&t| apply(t))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<f64> = (0..=truncation).map(|n| f.get(n).abs()).collect();
    for p in &profiles {
        for (slot, v) in out.iter_mut().zip(p.values()) {
            *slot = slot.max(v.abs());
        }
    }
    Ok(FiniteSequence::new(out))
}

/// `sup |W_t f(n)|` over the grid and `t → 0⁺`, for every `n ≤ truncation`.
pub fn maximal_heat_profile(
    params: JacobiParams,
    f: &FiniteSequence,
    grid: &TimeGrid,
    truncation: usize,
) -> Result<FiniteSequence> {
    check_truncation(f, truncation)?;
    grid_maximum(f, grid, truncation, |t| {
        apply_heat(params, t, f, truncation)
    })
}

/// `sup |P_t f(n)|` over the grid and `t → 0⁺`, for every `n ≤ truncation`.
pub fn maximal_poisson_profile(
    params: JacobiParams,
    f: &FiniteSequence,
    grid: &TimeGrid,
    truncation: usize,
    rule: Subordination,
) -> Result<FiniteSequence> {
    check_truncation(f, truncation)?;
    grid_maximum(f, grid, truncation, |t| {
        apply_poisson(params, t, f, truncation, rule)
    })
}

/// `sup |W_t f(n)|` over the grid and `t → 0⁺`.
pub fn maximal_heat(
    params: JacobiParams,
    f: &FiniteSequence,
    n: usize,
    grid: &TimeGrid,
) -> Result<f64> {
    let truncation = n.max(f.support());
    Ok(maximal_heat_profile(params, f, grid, truncation)?.get(n))
}

/// `sup |P_t f(n)|` over the grid and `t → 0⁺`, with the default rule.
pub fn maximal_poisson(
    params: JacobiParams,
    f: &FiniteSequence,
    n: usize,
    grid: &TimeGrid,
) -> Result<f64> {
    let truncation = n.max(f.support());
    Ok(maximal_poisson_profile(params, f, grid, truncation, Subordination::default())?.get(n))
}

/// `u(·, t) = W_t f` sampled on a grid together with `E(t) = ½ Σ_n u(n,t)²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub params: JacobiParams,
    pub truncation: usize,
    pub times: Vec<f64>,
    pub states: Vec<FiniteSequence>,
    pub energies: Vec<f64>,
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    n: usize,
    value: f64,
}

fn energy(u: &FiniteSequence) -> f64 {
    0.5 * u.dot(u)
}

impl EvolutionTrace {
    /// Largest `(E(t_{i+1}) - E(t_i)) / (t_{i+1} - t_i)` along the trace;
    /// non-positive up to rounding for a dissipative evolution.
    pub fn max_energy_slope(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.energies.windows(2))
            .map(|(t, e)| (e[1] - e[0]) / (t[1] - t[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `t,n,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for (t, state) in self.times.iter().zip(&self.states) {
            for (n, &value) in state.values().iter().enumerate() {
                writer.serialize(TraceRow { t: *t, n, value })?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Solves `∂u/∂t = 𝒥u`, `u(·,0) = f` at every grid time by applying `W_t`
/// directly. The truncation defaults to the one for the largest grid time.
pub fn evolve_ivp(
    params: JacobiParams,
    f: &FiniteSequence,
    grid: &TimeGrid,
    truncation: Option<usize>,
) -> Result<EvolutionTrace> {
    let truncation = truncation.unwrap_or_else(|| default_truncation(f.support(), grid.max()));
    check_truncation(f, truncation)?;
    let states = grid
        .times()
        .par_iter()
        .map(|&t| apply_heat(params, t, f, truncation))
        .collect::<Result<Vec<_>>>()?;
    let energies = states.iter().map(energy).collect();
    Ok(EvolutionTrace {
        params,
        truncation,
        times: grid.times().to_vec(),
        states,
        energies,
    })
}

/// Finite-difference diagnostics at one grid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyCheck {
    pub t: f64,
    pub energy: f64,
    /// Second-order difference quotient of `E` with step [`FD_STEP`].
    pub energy_rate: f64,
    /// `-Σ_n (δu(n,t))²`.
    pub dissipation: f64,
    /// `|energy_rate - dissipation| / |dissipation|` (zero when both vanish).
    pub relative_mismatch: f64,
    /// `‖(W_{t+h} f - W_t f)/h - 𝒥 W_t f‖₂` on indices below the truncation.
    pub pde_residual: f64,
}

/// Energy identity and PDE residual at each grid time. All evaluations around
/// one grid time share a single quadrature rule.
pub fn energy_checks(
    params: JacobiParams,
    f: &FiniteSequence,
    grid: &TimeGrid,
    truncation: Option<usize>,
) -> Result<Vec<EnergyCheck>> {
    let truncation = truncation.unwrap_or_else(|| default_truncation(f.support(), grid.max()));
    check_truncation(f, truncation)?;
    let h = FD_STEP;
    grid.times()
        .par_iter()
        .map(|&t| {
            if f.is_zero() {
                return Ok(EnergyCheck {
                    t,
                    energy: 0.0,
                    energy_rate: 0.0,
                    dissipation: 0.0,
                    relative_mismatch: 0.0,
                    pde_residual: 0.0,
                });
            }
            // central where possible, one-sided second order next to t = 0
            let shifts: Vec<f64> = if t >= h {
                vec![0.0, -h, h]
            } else {
                vec![0.0, h, 2.0 * h]
            };
            let blocks = heat_kernel_blocks_on_common_rule(
                params,
                t,
                f.support() + 1,
                truncation + 1,
                &shifts,
                DEFAULT_KERNEL_TOL,
            )?;
            let states: Vec<FiniteSequence> = blocks.iter().map(|b| apply_block(b, f)).collect();
            let e: Vec<f64> = states.iter().map(energy).collect();
            let energy_rate = if t >= h {
                (e[2] - e[1]) / (2.0 * h)
            } else {
                (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h)
            };
            let u = &states[0];
            let du = apply_delta(&params, u);
            let dissipation = -du.dot(&du);
            let relative_mismatch = if dissipation == 0.0 {
                energy_rate.abs()
            } else {
                (energy_rate - dissipation).abs() / dissipation.abs()
            };
            let forward = if t >= h { &states[2] } else { &states[1] };
            let generator = apply_jacobi_operator(&params, u, true);
            let pde_residual = (0..truncation)
                .map(|n| {
                    let r = (forward.get(n) - u.get(n)) / h - generator.get(n);
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            Ok(EnergyCheck {
                t,
                energy: e[0],
                energy_rate,
                dissipation,
                relative_mismatch,
                pde_residual,
            })
        })
        .collect()
}

/// `|Σ_{m ≤ truncation} K_{t1}(m,n) K_{t2}(m,j) - K_{t1+t2}(n,j)|`.
pub fn chapman_kolmogorov_check(
    params: JacobiParams,
    t1: f64,
    t2: f64,
    n: usize,
    j: usize,
    truncation: usize,
) -> Result<f64> {
    check_time(t1)?;
    check_time(t2)?;
    let tol = DEFAULT_KERNEL_TOL;
    let width = n.max(j) + 1;
    let first = heat_kernel_block(params, t1, truncation + 1, width, tol)?;
    let second = heat_kernel_block(params, t2, truncation + 1, width, tol)?;
    let joint = heat_kernel_block(params, t1 + t2, width, width, tol)?;
    let sum: f64 = (0..=truncation)
        .map(|m| first.get(m, n) * second.get(m, j))
        .sum();
    Ok((sum - joint.get(n, j)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![-1.0, 1.0]).is_err());
        let g = TimeGrid::logarithmic(1e-3, 1e3, 7).unwrap();
        assert_eq!(g.times()[0], 1e-3);
        assert_eq!(g.max(), 1e3);
        let r = g.refined();
        assert_eq!(r.len(), 13);
        assert!(g.times().iter().all(|t| r.times().contains(t)));
    }

    #[test]
    fn heat_at_time_zero_and_zero_input() {
        let q = p(0.3, 0.1);
        let f = FiniteSequence::new(vec![1.0, -0.5, 2.0]);
        assert_eq!(apply_heat(q, 0.0, &f, 10).unwrap(), f.resized(10));
        assert!(apply_heat(q, 1.0, &FiniteSequence::zeros(4), 10)
            .unwrap()
            .is_zero());
        assert!(apply_heat(q, 1.0, &f, 1).is_err());
        assert_eq!(
            apply_poisson(q, 0.0, &f, 5, Subordination::default()).unwrap(),
            f.resized(5)
        );
    }

    #[test]
    fn subordination_weights_sum_to_one() {
        for rule in [
            Subordination::default(),
            Subordination::GaussLaguerre { nodes: 64 },
        ] {
            let total: f64 = rule.nodes().unwrap().iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-13, "{rule:?}: {total}");
        }
        assert!(Subordination::LogTrapezoid { step: 0.0 }.nodes().is_err());
    }

    #[test]
    fn matrix_exponential_identity_at_zero() {
        let j = GeneralJacobiMatrix::from_params(p(0.0, 0.0), 30);
        let e = matrix_exponential_kernel(&j, 0.0, 20).unwrap();
        for m in 0..20 {
            for n in 0..20 {
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((e.get(m, n) - expected).abs() < 1e-13);
            }
        }
        assert!(matrix_exponential_kernel(&j, 1.0, 32).is_err());
    }

    #[test]
    fn discrete_measure_recovers_its_own_kernel() {
        // with as many rows as nodes, the spectrum of the truncation is the node set
        let nodes = [-0.9, -0.2, 0.4, 0.8, 0.95];
        let weights = [0.1, 0.3, 0.2, 0.25, 0.15];
        let j = GeneralJacobiMatrix::from_discrete_measure(&nodes, &weights, 4).unwrap();
        assert_eq!(j.s_plus(), 0.95);
        for t in [0.0, 0.7, 3.0] {
            let e = matrix_exponential_kernel(&j, t, 5).unwrap();
            for m in 0..5 {
                for n in 0..5 {
                    let k = discrete_measure_kernel(&j, &nodes, &weights, t, m, n).unwrap();
                    assert!((k - e.get(m, n)).abs() < 1e-12, "t={t} ({m},{n})");
                }
            }
        }
        assert!(GeneralJacobiMatrix::from_discrete_measure(&nodes, &weights, 5).is_err());
    }

    #[test]
    fn chapman_at_time_zero() {
        let q = p(0.2, 0.0);
        assert!(chapman_kolmogorov_check(q, 0.0, 0.0, 3, 3, 20).unwrap() < 1e-10);
        assert!(chapman_kolmogorov_check(q, 0.0, 1.5, 3, 6, 20).unwrap() < 1e-10);
    }

    #[test]
    fn energy_of_delta_three() {
        let q = p(0.7, -0.2);
        let grid = TimeGrid::new(vec![0.0, 0.5]).unwrap();
        let trace = evolve_ivp(q, &FiniteSequence::delta(3), &grid, None).unwrap();
        assert_eq!(trace.energies[0], 0.5);
        assert!(trace.energies[1] < 0.5);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,n,value"));
    }

    #[test]
    fn zero_trace() {
        let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        let trace = evolve_ivp(p(0.0, 0.0), &FiniteSequence::zeros(3), &grid, None).unwrap();
        assert!(trace.energies.iter().all(|e| *e == 0.0));
        assert!(trace.states.iter().all(FiniteSequence::is_zero));
    }
}
