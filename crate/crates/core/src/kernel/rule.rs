//! Discrete rules for `∫ e^{-t(1-x)} g(x) dμ_{a,b}(x)` with polynomial `g`.
//!
//! Moderate `t` uses a Gauss–Jacobi rule for `dμ_{a,b}` with the exponential
//! folded into the weights. Large `t` substitutes `1 - x = y/t`, which turns
//! the integral into `t^{-a-1} ∫ e^{-y} y^a (2 - y/t)^b g(1 - y/t) dy` over
//! `(0, 2t)`, and integrates it with a generalized Gauss–Laguerre rule. The
//! tail past `y = 2t` carries weight below `e^{-2t}` and is dropped. The
//! Laguerre path is taken once every node with non-negligible weight sits
//! below `t/4`, so the factor `(2 - y/t)^b` stays smooth where it matters.

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::quadrature::{gauss_jacobi_rule, gauss_laguerre_rule, node_count_heuristic};

/// Times above this use the Laguerre path. Laguerre weights past `y = 60` are
/// below `e^{-60}` relative, so every node that matters sits below `t/4`.
pub const LARGE_TIME: f64 = 250.0;
/// Doublings tried after the starting rule.
pub const MAX_DOUBLINGS: u32 = 3;
const LAGUERRE_DOUBLINGS: u32 = 1;
const LAGUERRE_BASE: usize = 48;
/// Rounding allowance per unit of `degree + 1 + t` added to the convergence
/// tolerance. The recurrence loses about this much per degree, and a node
/// error `δx` moves its folded weight by `t·δx` relative.
pub const ROUNDING_UNIT: f64 = 4e-15;

#[derive(Debug, Clone)]
pub struct HeatRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HeatRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RulePath {
    GaussJacobi,
    Laguerre,
}

fn bucket(count: usize) -> usize {
    if count <= 256 {
        count.div_ceil(16) * 16
    } else {
        count.div_ceil(128) * 128
    }
}

fn laguerre_nodes(degree: usize, level: u32) -> usize {
    (degree.div_ceil(2) + LAGUERRE_BASE) << level
}

pub fn choose_path(t: f64) -> RulePath {
    if t > LARGE_TIME {
        RulePath::Laguerre
    } else {
        RulePath::GaussJacobi
    }
}

/// Number of doubling levels available on `path` (levels `0..=max_level`).
pub fn max_level(path: RulePath) -> u32 {
    match path {
        RulePath::GaussJacobi => MAX_DOUBLINGS,
        RulePath::Laguerre => LAGUERRE_DOUBLINGS,
    }
}

pub fn heat_rule(
    measure: JacobiParams,
    t: f64,
    degree: usize,
    path: RulePath,
    level: u32,
) -> Result<HeatRule> {
    match path {
        RulePath::GaussJacobi => {
            let count = bucket(node_count_heuristic(t, degree)) << level;
            let rule = gauss_jacobi_rule(measure, count)?;
            let weights = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * (-t * (1.0 - x)).exp())
                .collect();
            Ok(HeatRule {
                nodes: rule.nodes.clone(),
                weights,
            })
        }
        RulePath::Laguerre => {
            let count = laguerre_nodes(degree, level);
            let rule = gauss_laguerre_rule(measure.alpha(), count)?;
            let scale = (-(measure.alpha() + 1.0) * t.ln()).exp();
            let mut nodes = Vec::with_capacity(count);
            let mut weights = Vec::with_capacity(count);
            for (&y, &lambda) in rule.nodes.iter().zip(&rule.weights) {
                let s = y / t;
                if s >= 2.0 {
                    continue;
                }
                nodes.push(1.0 - s);
                weights.push(lambda * scale * (2.0 - s).powf(measure.beta()));
            }
            Ok(HeatRule { nodes, weights })
        }
    }
}

/// Evaluate on successively doubled rules until two consecutive results
/// differ by at most `tol` (or the rounding allowance, if larger) under
/// `diff`; returns the finer one.
pub fn converge<T>(
    measure: JacobiParams,
    t: f64,
    degree: usize,
    tol: f64,
    what: &'static str,
    eval: impl Fn(&HeatRule) -> Result<T>,
    diff: impl Fn(&T, &T) -> f64,
) -> Result<T> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "time t = {t} must be finite and non-negative"
        )));
    }
    let tol = tol.max(ROUNDING_UNIT * (degree as f64 + 1.0 + t));
    let path = choose_path(t);
    let mut prev = eval(&heat_rule(measure, t, degree, path, 0)?)?;
    let mut last = f64::NAN;
    for level in 1..=max_level(path) {
        let cur = eval(&heat_rule(measure, t, degree, path, level)?)?;
        last = diff(&prev, &cur);
        if last <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        what,
        detail: format!("t = {t}, degree = {degree}: last change {last:e} > tol {tol:e}"),
    })
}
