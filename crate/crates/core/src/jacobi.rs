//! Recurrence coefficients and orthonormal Jacobi polynomials, the Jacobi
//! operator `J` on sequences, its shift `𝒥 = J - I`, and the first-order
//! factors `δ`, `δ*` with `𝒥 = -δ*δ`.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::sequence::FiniteSequence;
use crate::special::ln_gamma;

/// Absolute tolerance for identities among coefficients.
pub const COEFFICIENT_TOL: f64 = 1e-12;
/// Tolerance for identities that go through a quadrature rule.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// The parameter pair `(α, β)`, both strictly greater than `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawParams> for JacobiParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        JacobiParams::new(raw.alpha, raw.beta)
    }
}

impl From<JacobiParams> for RawParams {
    fn from(p: JacobiParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha and beta must be finite (got {alpha}, {beta})"
            )));
        }
        if alpha <= -1.0 || beta <= -1.0 {
            return Err(Error::invalid(format!(
                "alpha and beta must exceed -1 (got {alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `α ≥ -1/2` and `β ≥ -1/2`, the range where the kernel estimates hold.
    pub fn standard_range(&self) -> bool {
        self.alpha >= -0.5 && self.beta >= -0.5
    }

    /// Off-diagonal coefficient `a_n`.
    pub fn a(&self, n: usize) -> f64 {
        let (al, be) = (self.alpha, self.beta);
        let s = al + be;
        if n == 0 {
            2.0 / (s + 2.0) * ((al + 1.0) * (be + 1.0) / (s + 3.0)).sqrt()
        } else {
            let n = n as f64;
            let num = (n + 1.0) * (n + al + 1.0) * (n + be + 1.0) * (n + s + 1.0);
            let den = (2.0 * n + s + 1.0) * (2.0 * n + s + 3.0);
            2.0 / (2.0 * n + s + 2.0) * (num / den).sqrt()
        }
    }

    /// Diagonal coefficient `b_n`; exactly zero when `α == β`.
    pub fn b(&self, n: usize) -> f64 {
        let (al, be) = (self.alpha, self.beta);
        let s = al + be;
        if n == 0 {
            (be - al) / (s + 2.0)
        } else {
            let n = n as f64;
            (be * be - al * al) / ((2.0 * n + s) * (2.0 * n + s + 2.0))
        }
    }

    pub fn recurrence_coefficients(&self, n: usize) -> (f64, f64) {
        (self.a(n), self.b(n))
    }

    /// `ln w_n`, evaluated from log-gamma values.
    pub fn ln_normalization(&self, n: usize) -> f64 {
        let (al, be) = (self.alpha, self.beta);
        let s = al + be;
        if n == 0 {
            0.5 * (ln_gamma(s + 2.0) - (s + 1.0) * LN_2 - ln_gamma(al + 1.0) - ln_gamma(be + 1.0))
        } else {
            let nf = n as f64;
            0.5 * ((2.0 * nf + s + 1.0).ln() + ln_gamma(nf + 1.0) + ln_gamma(nf + s + 1.0)
                - (s + 1.0) * LN_2
                - ln_gamma(nf + al + 1.0)
                - ln_gamma(nf + be + 1.0))
        }
    }

    /// `w_n = 1 / ‖P_n‖` in `L²(dμ_{α,β})`.
    pub fn normalization_constant(&self, n: usize) -> f64 {
        self.ln_normalization(n).exp()
    }

    pub fn d(&self, n: usize) -> f64 {
        let (al, be) = (self.alpha, self.beta);
        let s = al + be;
        if n == 0 {
            (2.0 * (al + 1.0) / (s + 2.0)).sqrt()
        } else {
            let n = n as f64;
            (2.0 * (n + s + 1.0) * (n + al + 1.0) / ((2.0 * n + s + 1.0) * (2.0 * n + s + 2.0)))
                .sqrt()
        }
    }

    pub fn e(&self, n: usize) -> f64 {
        let (al, be) = (self.alpha, self.beta);
        let s = al + be;
        let n = n as f64;
        (2.0 * (n + be + 1.0) * (n + 1.0) / ((2.0 * n + s + 2.0) * (2.0 * n + s + 3.0))).sqrt()
    }

    /// Membership in the region `V` where the linearization coefficients of
    /// `p_m p_n` are all non-negative.
    pub fn in_region_v(&self) -> bool {
        let (al, be) = (self.alpha, self.beta);
        if al < be {
            return false;
        }
        let s1 = al + be + 1.0;
        let lhs = s1 * (al + be + 4.0).powi(2) * (al + be + 6.0);
        let rhs = (al - be).powi(2) * (s1 * s1 - 7.0 * s1 - 24.0);
        lhs >= rhs
    }

    /// The sufficient conditions `α ≥ β`, `α + β ≥ -1`.
    pub fn gasper_simple(&self) -> bool {
        self.alpha >= self.beta && self.alpha + self.beta >= -1.0
    }
}

/// `a_n, b_n, w_n, d_n, e_n` for `0 ≤ n ≤ cutoff`. Immutable; a larger cutoff
/// needs a new table.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    params: JacobiParams,
    a: Vec<f64>,
    b: Vec<f64>,
    w: Vec<f64>,
    d: Vec<f64>,
    e: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    alpha: f64,
    beta: f64,
    cutoff: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    w: Vec<f64>,
    d: Vec<f64>,
    e: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(params: JacobiParams, cutoff: usize) -> Self {
        let idx = 0..=cutoff;
        Self {
            params,
            a: idx.clone().map(|n| params.a(n)).collect(),
            b: idx.clone().map(|n| params.b(n)).collect(),
            w: idx
                .clone()
                .map(|n| params.normalization_constant(n))
                .collect(),
            d: idx.clone().map(|n| params.d(n)).collect(),
            e: idx.map(|n| params.e(n)).collect(),
        }
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn cutoff(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    /// Fill `out[k] = p_k(x)` for `k < out.len()`; needs `out.len() ≤ cutoff + 1`.
    /// No domain check, callers guarantee `|x| ≤ 1`.
    pub fn eval_all_into(&self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        assert!(out.len() <= self.a.len(), "table too short for degree");
        out[0] = self.w[0];
        if out.len() == 1 {
            return;
        }
        out[1] = (x - self.b[0]) * out[0] / self.a[0];
        for n in 1..out.len() - 1 {
            out[n + 1] = ((x - self.b[n]) * out[n] - self.a[n - 1] * out[n - 1]) / self.a[n];
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TableJson {
            alpha: self.params.alpha(),
            beta: self.params.beta(),
            cutoff: self.cutoff(),
            a: self.a.clone(),
            b: self.b.clone(),
            w: self.w.clone(),
            d: self.d.clone(),
            e: self.e.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parse a table previously written by [`CoefficientTable::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableJson = serde_json::from_str(text)?;
        let params = JacobiParams::new(doc.alpha, doc.beta)?;
        let len = doc.cutoff + 1;
        for (name, v) in [
            ("a", &doc.a),
            ("b", &doc.b),
            ("w", &doc.w),
            ("d", &doc.d),
            ("e", &doc.e),
        ] {
            if v.len() != len {
                return Err(Error::invalid(format!(
                    "field {name} has length {} but cutoff {} needs {len}",
                    v.len(),
                    doc.cutoff
                )));
            }
        }
        Ok(Self {
            params,
            a: doc.a,
            b: doc.b,
            w: doc.w,
            d: doc.d,
            e: doc.e,
        })
    }
}

fn check_domain(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > 1.0 {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    Ok(())
}

/// `p_n(x)` by the forward normalized recurrence.
pub fn eval_orthonormal(params: &JacobiParams, n: usize, x: f64) -> Result<f64> {
    Ok(*eval_orthonormal_all(params, n, x)?.last().unwrap())
}

/// `[p_0(x), ..., p_n(x)]` in one recurrence pass.
pub fn eval_orthonormal_all(params: &JacobiParams, n: usize, x: f64) -> Result<Vec<f64>> {
    check_domain(x)?;
    let mut out = vec![0.0; n + 1];
    out[0] = params.normalization_constant(0);
    if n >= 1 {
        out[1] = (x - params.b(0)) * out[0] / params.a(0);
    }
    for k in 1..n {
        out[k + 1] = ((x - params.b(k)) * out[k] - params.a(k - 1) * out[k - 1]) / params.a(k);
    }
    Ok(out)
}

/// `J f` (or `𝒥 f = (J - I) f` when `shifted`); output support is one past the input's.
pub fn apply_jacobi_operator(
    params: &JacobiParams,
    f: &FiniteSequence,
    shifted: bool,
) -> FiniteSequence {
    let len = f.len() + 1;
    let shift = if shifted { 1.0 } else { 0.0 };
    let out = (0..len)
        .map(|n| {
            let below = if n > 0 {
                params.a(n - 1) * f.get(n - 1)
            } else {
                0.0
            };
            below + (params.b(n) - shift) * f.get(n) + params.a(n) * f.get(n + 1)
        })
        .collect();
    FiniteSequence::new(out)
}

/// `δf(n) = d_n f(n) - e_n f(n+1)`; same support as `f`.
pub fn apply_delta(params: &JacobiParams, f: &FiniteSequence) -> FiniteSequence {
    let out = (0..f.len())
        .map(|n| params.d(n) * f.get(n) - params.e(n) * f.get(n + 1))
        .collect();
    FiniteSequence::new(out)
}

/// `δ*f(n) = d_n f(n) - e_{n-1} f(n-1)`, `δ*f(0) = d_0 f(0)`; support grows by one.
pub fn apply_delta_star(params: &JacobiParams, f: &FiniteSequence) -> FiniteSequence {
    let out = (0..=f.len())
        .map(|n| {
            let lower = if n > 0 {
                params.e(n - 1) * f.get(n - 1)
            } else {
                0.0
            };
            params.d(n) * f.get(n) - lower
        })
        .collect();
    FiniteSequence::new(out)
}
