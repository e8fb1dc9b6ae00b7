//! Symmetric tridiagonal eigensolver and the Gaussian rules built on it.
//!
//! Nodes are eigenvalues of the truncated Jacobi matrix and weights are
//! `mass · v_0(k)²` where `v_0` is the first row of the orthonormal
//! eigenvector matrix (Golub–Welsch). The eigensolver is implicit QL with a
//! Wilkinson shift; it accumulates only the eigenvector rows the caller asks
//! for, so a quadrature rule costs `O(N²)`.

use serde::Serialize;
use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::special::{ln_gamma, ln_total_mass};

/// QL iterations allowed per eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 50;

const CACHE_CAPACITY: usize = 512;

#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `first_row[k]` is the first component of the unit eigenvector for `values[k]`.
    pub first_row: Vec<f64>,
    /// Row-major `n × n`, `vectors[i * n + k]` = component `i` of eigenvector `k`.
    pub vectors: Option<Vec<f64>>,
}

impl TridiagonalEigen {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Eigenvalues and first eigenvector components of the symmetric tridiagonal
/// matrix with the given diagonal and off-diagonal.
pub fn tridiagonal_eigen(diagonal: &[f64], offdiagonal: &[f64]) -> Result<TridiagonalEigen> {
    solve_tridiagonal(diagonal, offdiagonal, false)
}

/// As [`tridiagonal_eigen`] but also returns the full eigenvector matrix.
pub fn tridiagonal_eigen_full(diagonal: &[f64], offdiagonal: &[f64]) -> Result<TridiagonalEigen> {
    solve_tridiagonal(diagonal, offdiagonal, true)
}

fn solve_tridiagonal(
    diagonal: &[f64],
    offdiagonal: &[f64],
    full: bool,
) -> Result<TridiagonalEigen> {
    let n = diagonal.len();
    if n == 0 {
        return Err(Error::invalid("empty tridiagonal matrix"));
    }
    if offdiagonal.len() + 1 != n {
        return Err(Error::invalid(format!(
            "off-diagonal length {} does not match diagonal length {n}",
            offdiagonal.len()
        )));
    }
    if diagonal.iter().chain(offdiagonal).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("tridiagonal matrix entry".into()));
    }
    let mut d = diagonal.to_vec();
    let mut e = offdiagonal.to_vec();
    e.push(0.0);
    let rows = if full { n } else { 1 };
    let mut z = vec![0.0; rows * n];
    for r in 0..rows {
        z[r * n + r] = 1.0;
    }
    implicit_ql(&mut d, &mut e, &mut z, rows)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&k| d[k]).collect();
    let first_row = order.iter().map(|&k| z[k]).collect();
    let vectors = full.then(|| {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for (col, &k) in order.iter().enumerate() {
                v[i * n + col] = z[i * n + k];
            }
        }
        v
    });
    Ok(TridiagonalEigen {
        values,
        first_row,
        vectors,
    })
}

/// In-place implicit QL. `e[i]` couples `i` and `i + 1`, `e[n-1]` is scratch.
/// `z` holds `rows` rows of the accumulated rotation (row-major, width n).
fn implicit_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], rows: usize) -> Result<()> {
    let n = d.len();
    let norm = (0..n)
        .map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0f64, f64::max);
    let small = f64::EPSILON * norm;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n && e[m].abs() > small {
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    what: "tridiagonal eigensolver",
                    detail: format!("eigenvalue {l} after {MAX_SWEEPS} sweeps"),
                });
            }
            // Wilkinson shift from the leading 2×2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut restarted = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    restarted = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..rows {
                    let row = &mut z[k * n..(k + 1) * n];
                    let zi = row[i];
                    let zi1 = row[i + 1];
                    row[i + 1] = s * zi + c * zi1;
                    row[i] = c * zi - s * zi1;
                }
            }
            if restarted {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Gauss–Jacobi rule for `dμ_{α,β}(x) = (1-x)^α (1+x)^β dx` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub params: JacobiParams,
    /// Strictly increasing, inside `(-1, 1)`.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly: `2·len - 1`.
    pub exactness: usize,
}

#[derive(Serialize)]
struct NodeRow {
    node: f64,
    weight: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `node,weight` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_node_csv(out, &self.nodes, &self.weights)
    }
}

fn write_node_csv<W: Write>(out: W, nodes: &[f64], weights: &[f64]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for (&node, &weight) in nodes.iter().zip(weights) {
        writer.serialize(NodeRow { node, weight })?;
    }
    writer.flush()?;
    Ok(())
}

/// Build a Gauss–Jacobi rule without touching the cache.
pub fn build_gauss_jacobi_rule(params: JacobiParams, node_count: usize) -> Result<QuadratureRule> {
    if node_count == 0 {
        return Err(Error::invalid("node_count must be at least 1"));
    }
    let diagonal: Vec<f64> = (0..node_count).map(|n| params.b(n)).collect();
    let offdiagonal: Vec<f64> = (0..node_count - 1).map(|n| params.a(n)).collect();
    let eig = tridiagonal_eigen(&diagonal, &offdiagonal)?;
    let mass = ln_total_mass(params.alpha(), params.beta()).exp();
    let weights = eig.first_row.iter().map(|v| mass * v * v).collect();
    let mut nodes = eig.values;
    // Spectrum sits in [-1, 1]; rounding can touch an endpoint for huge rules.
    let edge = 1.0 - f64::EPSILON;
    for x in &mut nodes {
        *x = x.clamp(-edge, edge);
    }
    Ok(QuadratureRule {
        params,
        nodes,
        weights,
        exactness: 2 * node_count - 1,
    })
}

struct RuleCache<V> {
    map: RwLock<HashMap<(u64, u64, usize), Arc<V>>>,
}

impl<V> RuleCache<V> {
    fn new() -> Self {
        Self {
            map: RwLock::new(HashMap::new()),
        }
    }

    fn get_or_build(
        &self,
        key: (u64, u64, usize),
        build: impl FnOnce() -> Result<V>,
    ) -> Result<Arc<V>> {
        if let Some(hit) = self.map.read().expect("rule cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let built = Arc::new(build()?);
        let mut map = self.map.write().expect("rule cache poisoned");
        if map.len() >= CACHE_CAPACITY {
            map.clear();
        }
        Ok(Arc::clone(map.entry(key).or_insert(built)))
    }
}

fn jacobi_cache() -> &'static RuleCache<QuadratureRule> {
    static CACHE: OnceLock<RuleCache<QuadratureRule>> = OnceLock::new();
    CACHE.get_or_init(RuleCache::new)
}

fn laguerre_cache() -> &'static RuleCache<LaguerreRule> {
    static CACHE: OnceLock<RuleCache<LaguerreRule>> = OnceLock::new();
    CACHE.get_or_init(RuleCache::new)
}

/// Cached Gauss–Jacobi rule with exactness `2·node_count - 1`.
pub fn gauss_jacobi_rule(params: JacobiParams, node_count: usize) -> Result<Arc<QuadratureRule>> {
    let key = (
        params.alpha().to_bits(),
        params.beta().to_bits(),
        node_count,
    );
    jacobi_cache().get_or_build(key, || build_gauss_jacobi_rule(params, node_count))
}

/// `Σ weight · integrand(node)`; fails if the integrand is not finite at a node.
pub fn integrate(rule: &QuadratureRule, integrand: impl Fn(f64) -> f64) -> Result<f64> {
    let mut sum = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = integrand(x);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("integrand at node {x}")));
        }
        sum += w * v;
    }
    Ok(sum)
}

/// Starting node count for integrands `e^{-t(1-x)} · poly(x)` with
/// `deg poly ≤ max_degree`. Callers double once and compare.
pub fn node_count_heuristic(t: f64, max_degree: usize) -> usize {
    max_degree.div_ceil(2) + t.max(0.0).ceil() as usize + 40
}

/// Generalized Gauss–Laguerre rule for `u^γ e^{-u} du` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaguerreRule {
    pub exponent: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LaguerreRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_node_csv(out, &self.nodes, &self.weights)
    }
}

pub fn build_gauss_laguerre_rule(exponent: f64, node_count: usize) -> Result<LaguerreRule> {
    if node_count == 0 {
        return Err(Error::invalid("node_count must be at least 1"));
    }
    if !(exponent > -1.0) || !exponent.is_finite() {
        return Err(Error::invalid(format!(
            "Laguerre exponent {exponent} must exceed -1"
        )));
    }
    let diagonal: Vec<f64> = (0..node_count)
        .map(|k| 2.0 * k as f64 + exponent + 1.0)
        .collect();
    let offdiagonal: Vec<f64> = (1..node_count)
        .map(|k| (k as f64 * (k as f64 + exponent)).sqrt())
        .collect();
    let eig = tridiagonal_eigen(&diagonal, &offdiagonal)?;
    let mass = ln_gamma(exponent + 1.0).exp();
    let weights = eig.first_row.iter().map(|v| mass * v * v).collect();
    let nodes = eig
        .values
        .iter()
        .map(|&x| x.max(f64::MIN_POSITIVE))
        .collect();
    Ok(LaguerreRule {
        exponent,
        nodes,
        weights,
    })
}

/// Cached generalized Gauss–Laguerre rule.
pub fn gauss_laguerre_rule(exponent: f64, node_count: usize) -> Result<Arc<LaguerreRule>> {
    let key = (exponent.to_bits(), 0, node_count);
    laguerre_cache().get_or_build(key, || build_gauss_laguerre_rule(exponent, node_count))
}
