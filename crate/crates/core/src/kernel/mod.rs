//! The heat kernel `K_t(m,n) = ∫ e^{-(1-x)t} p_m(x) p_n(x) dμ_{α,β}(x)` and
//! the structures built from it.

mod bessel;
mod frak;
mod linearization;
pub mod rule;

pub use bessel::{
    modified_bessel_i, modified_bessel_i_scaled, MAX_ARGUMENT as BESSEL_MAX_ARGUMENT,
};
pub use frak::{frak_i_case, frak_i_direct, frak_i_recursive, FrakCase, FrakISpec};
pub use linearization::{
    convolution, h_t_coefficient, h_t_direct, h_t_majorant, h_t_rodrigues, h_t_sequence,
    linearization_coefficients, translation, triple_product_integral, HtCoefficient,
    LinearizationRow,
};

use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::io::Write;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::jacobi::{CoefficientTable, JacobiParams};
use rule::{converge, HeatRule};

/// Default convergence tolerance for kernel values (absolute).
pub const DEFAULT_KERNEL_TOL: f64 = 1e-13;

/// Normalization constant of the Chebyshev closed form for orthonormal
/// polynomials, `K = κ ε_m ε_n e^{-t}(I_{|n-m|}(t) + I_{n+m}(t))` with
/// `ε_0 = 1/√2` and `ε_k = 1` otherwise.
pub const CHEBYSHEV_KAPPA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelQuery {
    pub params: JacobiParams,
    pub t: f64,
    pub m: usize,
    pub n: usize,
}

impl KernelQuery {
    pub fn new(params: JacobiParams, t: f64, m: usize, n: usize) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!(
                "time t = {t} must be finite and non-negative"
            )));
        }
        Ok(Self { params, t, m, n })
    }
}

/// `p_0..p_degree` at every node, stored degree-major (`values[k * nodes + j]`).
pub(crate) struct NodeValues {
    pub nodes: usize,
    pub values: Vec<f64>,
}

impl NodeValues {
    pub fn new(table: &CoefficientTable, rule_nodes: &[f64], degree: usize) -> Self {
        let nodes = rule_nodes.len();
        let mut values = vec![0.0; (degree + 1) * nodes];
        let mut scratch = vec![0.0; degree + 1];
        for (j, &x) in rule_nodes.iter().enumerate() {
            table.eval_all_into(x, &mut scratch);
            for (k, v) in scratch.iter().enumerate() {
                values[k * nodes + j] = *v;
            }
        }
        Self { nodes, values }
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.nodes..(k + 1) * self.nodes]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense `rows × cols` block of `K_t(m, n)` for `m < rows`, `n < cols`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelBlock {
    pub t: f64,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl KernelBlock {
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.cols + n]
    }

    fn max_abs_diff(&self, other: &KernelBlock) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

fn block_on_rule(
    params: JacobiParams,
    rule: &HeatRule,
    rows: usize,
    cols: usize,
    t: f64,
) -> KernelBlock {
    let top = rows.max(cols).saturating_sub(1);
    let table = CoefficientTable::new(params, top + 1);
    let pv = NodeValues::new(&table, &rule.nodes, top);
    // weighted copies for the lower index of each pair
    let weighted: Vec<f64> = (0..=top)
        .flat_map(|k| {
            pv.row(k)
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| w * p)
                .collect::<Vec<_>>()
        })
        .collect();
    let nodes = pv.nodes;
    let mut values = vec![0.0; rows * cols];
    values
        .par_chunks_mut(cols.max(1))
        .enumerate()
        .for_each(|(m, row)| {
            for (n, slot) in row.iter_mut().enumerate() {
                let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
                *slot = dot(&weighted[lo * nodes..(lo + 1) * nodes], pv.row(hi));
            }
        });
    KernelBlock {
        t,
        rows,
        cols,
        values,
    }
}

/// `K_t(m, n)` for `m < rows`, `n < cols`, converged by rule doubling so that
/// the largest entry change is at most `tol`.
pub fn heat_kernel_block(
    params: JacobiParams,
    t: f64,
    rows: usize,
    cols: usize,
    tol: f64,
) -> Result<KernelBlock> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(
            "kernel block needs at least one row and column",
        ));
    }
    let degree = rows + cols - 2;
    converge(
        params,
        t,
        degree,
        tol,
        "heat kernel block",
        |rule| Ok(block_on_rule(params, rule, rows, cols, t)),
        |a, b| a.max_abs_diff(b),
    )
}

/// Blocks at `t + shift` for each shift, all evaluated on the rule that
/// converged at `t`. Finite differences in time then carry no noise from
/// switching rules between neighbouring times.
pub(crate) fn heat_kernel_blocks_on_common_rule(
    params: JacobiParams,
    t: f64,
    rows: usize,
    cols: usize,
    shifts: &[f64],
    tol: f64,
) -> Result<Vec<KernelBlock>> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(
            "kernel block needs at least one row and column",
        ));
    }
    if let Some(s) = shifts.iter().find(|&&s| !(t + s >= 0.0)) {
        return Err(Error::invalid(format!(
            "shifted time {t} + {s} is negative"
        )));
    }
    let degree = rows + cols - 2;
    let (_, rule) = converge(
        params,
        t,
        degree,
        tol,
        "heat kernel block",
        |rule| Ok((block_on_rule(params, rule, rows, cols, t), rule.clone())),
        |a, b| a.0.max_abs_diff(&b.0),
    )?;
    Ok(shifts
        .iter()
        .map(|&s| {
            let shifted = HeatRule {
                nodes: rule.nodes.clone(),
                weights: rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| w * (-s * (1.0 - x)).exp())
                    .collect(),
            };
            block_on_rule(params, &shifted, rows, cols, t + s)
        })
        .collect())
}

type KernelKey = (u64, u64, u64, usize, usize, u64);

fn kernel_cache() -> &'static RwLock<HashMap<KernelKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<KernelKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

const KERNEL_CACHE_CAPACITY: usize = 1 << 16;

/// Single kernel value. Symmetric in `(m, n)` bit for bit: the pair is
/// ordered before evaluation and the cache key is ordered the same way.
pub fn heat_kernel(query: &KernelQuery, tol: f64) -> Result<f64> {
    let (lo, hi) = (query.m.min(query.n), query.m.max(query.n));
    let p = query.params;
    let key = (
        p.alpha().to_bits(),
        p.beta().to_bits(),
        query.t.to_bits(),
        lo,
        hi,
        tol.to_bits(),
    );
    if let Some(&v) = kernel_cache()
        .read()
        .expect("kernel cache poisoned")
        .get(&key)
    {
        return Ok(v);
    }
    let table = CoefficientTable::new(p, hi + 1);
    let value = converge(
        p,
        query.t,
        lo + hi,
        tol,
        "heat kernel",
        |rule| {
            let pv = NodeValues::new(&table, &rule.nodes, hi);
            let weighted: Vec<f64> = pv
                .row(lo)
                .iter()
                .zip(&rule.weights)
                .map(|(a, w)| w * a)
                .collect();
            Ok(dot(&weighted, pv.row(hi)))
        },
        |a, b| (a - b).abs(),
    )?;
    let mut cache = kernel_cache().write().expect("kernel cache poisoned");
    if cache.len() >= KERNEL_CACHE_CAPACITY {
        cache.clear();
    }
    cache.insert(key, value);
    Ok(value)
}

/// Chebyshev (`α = β = -1/2`) kernel from modified Bessel functions.
/// Valid for `0 ≤ t ≤ 200`.
pub fn cheb_heat_closed_form(t: f64, m: usize, n: usize) -> Result<f64> {
    let eps = |k: usize| {
        if k == 0 {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            1.0
        }
    };
    let diff = m.abs_diff(n);
    Ok(CHEBYSHEV_KAPPA
        * eps(m)
        * eps(n)
        * (modified_bessel_i_scaled(diff, t)? + modified_bessel_i_scaled(m + n, t)?))
}

/// Kernel blocks over several times, for export.
#[derive(Debug, Clone, Serialize)]
pub struct KernelGrid {
    pub params: JacobiParams,
    pub tol: f64,
    pub blocks: Vec<KernelBlock>,
}

#[derive(Serialize)]
struct KernelRow {
    t: f64,
    m: usize,
    n: usize,
    value: f64,
}

impl KernelGrid {
    pub fn compute(
        params: JacobiParams,
        times: &[f64],
        m_max: usize,
        n_max: usize,
        tol: f64,
    ) -> Result<Self> {
        let blocks = times
            .iter()
            .map(|&t| heat_kernel_block(params, t, m_max + 1, n_max + 1, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            tol,
            blocks,
        })
    }

    /// `t,m,n,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for block in &self.blocks {
            for m in 0..block.rows {
                for n in 0..block.cols {
                    writer.serialize(KernelRow {
                        t: block.t,
                        m,
                        n,
                        value: block.get(m, n),
                    })?;
                }
            }
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
