//! Linearization coefficients of `p_m p_n`, the coefficients `h_t(k)`, and the
//! translation and convolution operators they define.

use serde::Serialize;
use std::io::Write;

use super::rule::converge;
use super::NodeValues;
use crate::error::{Error, Result};
use crate::jacobi::{CoefficientTable, JacobiParams};
use crate::quadrature::build_gauss_jacobi_rule;
use crate::sequence::FiniteSequence;
use crate::special::{ln_gamma, ln_total_mass};

/// Truncation threshold on the majorant of `h_t(k)`.
pub const H_T_TRUNCATION: f64 = 1e-15;
const H_T_MAX_INDEX: usize = 4000;

/// `c(k, m, n)` for `k = |m-n| ..= m+n` in `p_m p_n = Σ_k c(k) p_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizationRow {
    pub params: JacobiParams,
    pub m: usize,
    pub n: usize,
    pub coefficients: Vec<f64>,
}

#[derive(Serialize)]
struct CoefficientRow {
    k: usize,
    c: f64,
}

impl LinearizationRow {
    pub fn k_min(&self) -> usize {
        self.m.abs_diff(self.n)
    }

    pub fn k_max(&self) -> usize {
        self.m + self.n
    }

    /// Coefficient of `p_k`; zero outside the band.
    pub fn get(&self, k: usize) -> f64 {
        if k < self.k_min() || k > self.k_max() {
            0.0
        } else {
            self.coefficients[k - self.k_min()]
        }
    }

    /// `k,c` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for (i, &c) in self.coefficients.iter().enumerate() {
            writer.serialize(CoefficientRow {
                k: self.k_min() + i,
                c,
            })?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Triple products `∫ p_m p_n p_k dμ` on a rule of exactness `≥ 2(m+n)`,
/// which is exact up to rounding for every `k` in the band.
pub fn linearization_coefficients(
    params: JacobiParams,
    m: usize,
    n: usize,
) -> Result<LinearizationRow> {
    let top = m + n;
    let rule = build_gauss_jacobi_rule(params, top + 1)?;
    let table = CoefficientTable::new(params, top + 1);
    let pv = NodeValues::new(&table, &rule.nodes, top);
    let weighted: Vec<f64> = rule
        .weights
        .iter()
        .zip(pv.row(m).iter().zip(pv.row(n)))
        .map(|(w, (a, b))| w * a * b)
        .collect();
    let coefficients = (m.abs_diff(n)..=top)
        .map(|k| weighted.iter().zip(pv.row(k)).map(|(x, y)| x * y).sum())
        .collect();
    Ok(LinearizationRow {
        params,
        m,
        n,
        coefficients,
    })
}

/// `∫ p_m p_n p_k dμ` for any `k`, on a rule exact for degree `m+n+k`.
pub fn triple_product_integral(params: JacobiParams, m: usize, n: usize, k: usize) -> Result<f64> {
    let top = m.max(n).max(k);
    let rule = build_gauss_jacobi_rule(params, (m + n + k) / 2 + 1)?;
    let table = CoefficientTable::new(params, top + 1);
    let pv = NodeValues::new(&table, &rule.nodes, top);
    Ok((0..rule.len())
        .map(|j| rule.weights[j] * pv.row(m)[j] * pv.row(n)[j] * pv.row(k)[j])
        .sum())
}

/// `h_t(k)` from both routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HtCoefficient {
    /// `∫ e^{-(1-x)t} p_k dμ` by quadrature.
    pub direct: f64,
    /// `w_k t^k / (2^k k!) ∫ e^{-t(1-x)} (1-x)^{α+k} (1+x)^{β+k} dx`, non-negative by construction.
    pub rodrigues: f64,
}

impl HtCoefficient {
    pub fn value(&self) -> f64 {
        self.rodrigues
    }
}

pub fn h_t_direct(params: JacobiParams, t: f64, k: usize, tol: f64) -> Result<f64> {
    let table = CoefficientTable::new(params, k + 1);
    converge(
        params,
        t,
        k,
        tol,
        "h_t direct",
        |rule| {
            let pv = NodeValues::new(&table, &rule.nodes, k);
            Ok(rule.weights.iter().zip(pv.row(k)).map(|(w, p)| w * p).sum())
        },
        |a: &f64, b| (a - b).abs(),
    )
}

fn ln_rodrigues_prefactor(params: JacobiParams, t: f64, k: usize) -> f64 {
    let kf = k as f64;
    params.ln_normalization(k) + kf * t.ln() - kf * std::f64::consts::LN_2 - ln_gamma(kf + 1.0)
}

pub fn h_t_rodrigues(params: JacobiParams, t: f64, k: usize, tol: f64) -> Result<f64> {
    if k > 0 && t == 0.0 {
        return Ok(0.0);
    }
    let shifted = JacobiParams::new(params.alpha() + k as f64, params.beta() + k as f64)?;
    let integral = converge(
        shifted,
        t,
        0,
        tol,
        "h_t rodrigues",
        |rule| Ok(rule.weights.iter().sum::<f64>()),
        |a: &f64, b| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE),
    )?;
    let prefactor = if k == 0 {
        params.normalization_constant(0)
    } else {
        ln_rodrigues_prefactor(params, t, k).exp()
    };
    Ok(prefactor * integral)
}

pub fn h_t_coefficient(params: JacobiParams, t: f64, k: usize, tol: f64) -> Result<HtCoefficient> {
    Ok(HtCoefficient {
        direct: h_t_direct(params, t, k, tol)?,
        rodrigues: h_t_rodrigues(params, t, k, tol)?,
    })
}

/// `w_k t^k / (2^k k!) · μ_{α+k,β+k}([-1,1])`, an upper bound for `h_t(k)`.
pub fn h_t_majorant(params: JacobiParams, t: f64, k: usize) -> f64 {
    if k == 0 {
        return params.normalization_constant(0)
            * ln_total_mass(params.alpha(), params.beta()).exp();
    }
    if t == 0.0 {
        return 0.0;
    }
    (ln_rodrigues_prefactor(params, t, k)
        + ln_total_mass(params.alpha() + k as f64, params.beta() + k as f64))
    .exp()
}

/// `h_t` cut at the first `k` past the peak of the majorant where it drops
/// below [`H_T_TRUNCATION`].
pub fn h_t_sequence(params: JacobiParams, t: f64, tol: f64) -> Result<FiniteSequence> {
    let mut values = Vec::new();
    let mut k = 0;
    loop {
        let bound = h_t_majorant(params, t, k);
        if bound < H_T_TRUNCATION && k as f64 >= t {
            break;
        }
        if k >= H_T_MAX_INDEX {
            return Err(Error::NoConvergence {
                what: "h_t truncation",
                detail: format!("majorant still {bound:e} at k = {k} for t = {t}"),
            });
        }
        values.push(h_t_rodrigues(params, t, k, tol)?);
        k += 1;
    }
    Ok(FiniteSequence::new(values))
}

/// `τ_n g(m) = Σ_{k=|m-n|}^{m+n} c(k, m, n) g(k)`; support `n + support(g)`.
pub fn translation(params: JacobiParams, n: usize, g: &FiniteSequence) -> Result<FiniteSequence> {
    let top = n + g.support();
    let out = (0..=top)
        .map(|m| {
            let row = linearization_coefficients(params, m, n)?;
            let hi = row.k_max().min(g.support());
            Ok((row.k_min()..=hi.max(row.k_min()))
                .filter(|&k| k <= hi)
                .map(|k| row.get(k) * g.get(k))
                .sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FiniteSequence::new(out))
}

/// `(f ∗ g)(n) = Σ_m f(m) τ_n g(m)`; support `support(f) + support(g)`.
pub fn convolution(
    params: JacobiParams,
    f: &FiniteSequence,
    g: &FiniteSequence,
) -> Result<FiniteSequence> {
    let top = f.support() + g.support();
    let out = (0..=top)
        .map(|n| {
            let tau = translation(params, n, g)?;
            Ok((0..=f.support()).map(|m| f.get(m) * tau.get(m)).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FiniteSequence::new(out))
}
