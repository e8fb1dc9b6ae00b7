//! The mixed integrals
//! `𝔍_t(n,m) = ∫ e^{-t(1-x)} P_n^{(a,b)}(x) P_m^{(A,B)}(x) (1-x)^α (1+x)^β dx`
//! and the integration-by-parts identities that lower one degree at a time.

use serde::{Deserialize, Serialize};

use super::rule::converge;
use super::NodeValues;
use crate::error::{Error, Result};
use crate::jacobi::{CoefficientTable, JacobiParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrakISpec {
    pub a: f64,
    pub b: f64,
    pub big_a: f64,
    pub big_b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub m: usize,
    pub t: f64,
}

impl FrakISpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        big_a: f64,
        big_b: f64,
        alpha: f64,
        beta: f64,
        n: usize,
        m: usize,
        t: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("a", a),
            ("b", b),
            ("A", big_a),
            ("B", big_b),
            ("alpha", alpha),
            ("beta", beta),
        ] {
            if !(v > -1.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} = {v} must be finite and exceed -1"
                )));
            }
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!(
                "time t = {t} must be finite and non-negative"
            )));
        }
        Ok(Self {
            a,
            b,
            big_a,
            big_b,
            alpha,
            beta,
            n,
            m,
            t,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn with(
        self,
        a: f64,
        b: f64,
        big_a: f64,
        big_b: f64,
        alpha: f64,
        beta: f64,
        n: usize,
        m: usize,
    ) -> Self {
        Self {
            a,
            b,
            big_a,
            big_b,
            alpha,
            beta,
            n,
            m,
            t: self.t,
        }
    }
}

/// Direct quadrature under `(1-x)^α (1+x)^β`, with `P = p / w` taken from
/// separate coefficient tables for `(a, b)` and `(A, B)`. Converged to `tol`
/// relative to `max(1, |value|)`.
pub fn frak_i_direct(spec: &FrakISpec, tol: f64) -> Result<f64> {
    let measure = JacobiParams::new(spec.alpha, spec.beta)?;
    let first = JacobiParams::new(spec.a, spec.b)?;
    let second = JacobiParams::new(spec.big_a, spec.big_b)?;
    let first_table = CoefficientTable::new(first, spec.n + 1);
    let second_table = CoefficientTable::new(second, spec.m + 1);
    let w_n = first_table.w()[spec.n];
    let w_m = second_table.w()[spec.m];
    converge(
        measure,
        spec.t,
        spec.n + spec.m,
        tol,
        "frak_i_direct",
        |rule| {
            let pn = NodeValues::new(&first_table, &rule.nodes, spec.n);
            let pm = NodeValues::new(&second_table, &rule.nodes, spec.m);
            let sum: f64 = rule
                .weights
                .iter()
                .zip(pn.row(spec.n).iter().zip(pm.row(spec.m)))
                .map(|(w, (x, y))| w * x * y)
                .sum();
            Ok(sum / (w_n * w_m))
        },
        |x, y| (x - y).abs() / x.abs().max(1.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrakCase {
    /// `n, m ≥ 1`
    A,
    /// `n = 0, m ≥ 1`
    B,
    /// `n ≥ 1, m = 0`
    C,
}

/// Which identity applies, after checking the non-degeneracy conditions.
pub fn frak_i_case(spec: &FrakISpec) -> Result<FrakCase> {
    let nn = spec.n as f64 + spec.a + spec.b + 1.0;
    let mm = spec.m as f64 + spec.big_a + spec.big_b + 1.0;
    if nn == 0.0 || mm == 0.0 {
        return Err(Error::Degenerate(format!(
            "n + a + b + 1 = {nn} or m + A + B + 1 = {mm} vanishes"
        )));
    }
    let gap = spec.n as f64 * nn - spec.m as f64 * mm;
    if gap.abs() <= 1e-12 * (spec.n as f64 * nn).abs().max(spec.m as f64 * mm).max(1.0) {
        return Err(Error::Degenerate(format!(
            "n(n+a+b+1) = m(m+A+B+1) for n = {}, m = {}",
            spec.n, spec.m
        )));
    }
    match (spec.n, spec.m) {
        (0, 0) => Err(Error::Degenerate(
            "n = m = 0 has no lowering identity".into(),
        )),
        (0, _) => Ok(FrakCase::B),
        (_, 0) => Ok(FrakCase::C),
        _ => Ok(FrakCase::A),
    }
}

/// One application of the lowering identity; every integral on the right is
/// evaluated with [`frak_i_direct`].
pub fn frak_i_recursive(spec: &FrakISpec, tol: f64) -> Result<f64> {
    let case = frak_i_case(spec)?;
    let s = *spec;
    let t = s.t;
    let (a, b, aa, bb, al, be) = (s.a, s.b, s.big_a, s.big_b, s.alpha, s.beta);
    let direct = |x: FrakISpec| frak_i_direct(&x, tol);
    match case {
        FrakCase::B => {
            let m = s.m;
            let two_m = 2.0 * m as f64;
            Ok(
                t / two_m * direct(s.with(a, b, aa + 1.0, bb + 1.0, al + 1.0, be + 1.0, 0, m - 1))?
                    - (al - aa) / two_m
                        * direct(s.with(a, b, aa + 1.0, bb + 1.0, al, be + 1.0, 0, m - 1))?
                    + (be - bb) / two_m
                        * direct(s.with(a, b, aa + 1.0, bb + 1.0, al + 1.0, be, 0, m - 1))?,
            )
        }
        FrakCase::C => {
            let n = s.n;
            let two_n = 2.0 * n as f64;
            Ok(
                t / two_n * direct(s.with(a + 1.0, b + 1.0, aa, bb, al + 1.0, be + 1.0, n - 1, 0))?
                    - (al - a) / two_n
                        * direct(s.with(a + 1.0, b + 1.0, aa, bb, al, be + 1.0, n - 1, 0))?
                    + (be - b) / two_n
                        * direct(s.with(a + 1.0, b + 1.0, aa, bb, al + 1.0, be, n - 1, 0))?,
            )
        }
        FrakCase::A => {
            let (n, m) = (s.n, s.m);
            let nn = n as f64 + a + b + 1.0;
            let mm = m as f64 + aa + bb + 1.0;
            let prefactor = nn * mm / (2.0 * (n as f64 * nn - m as f64 * mm));
            let lower_n = |al2, be2| direct(s.with(a + 1.0, b + 1.0, aa, bb, al2, be2, n - 1, m));
            let lower_m = |al2, be2| direct(s.with(a, b, aa + 1.0, bb + 1.0, al2, be2, n, m - 1));
            let bracket = t / mm * lower_n(al + 1.0, be + 1.0)?
                - (al - a) / mm * lower_n(al, be + 1.0)?
                + (be - b) / mm * lower_n(al + 1.0, be)?
                - t / nn * lower_m(al + 1.0, be + 1.0)?
                + (al - aa) / nn * lower_m(al, be + 1.0)?
                - (be - bb) / nn * lower_m(al + 1.0, be)?;
            Ok(prefactor * bracket)
        }
    }
}
