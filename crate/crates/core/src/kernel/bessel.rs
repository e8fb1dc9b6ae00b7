//! Modified Bessel functions of the first kind, integer order, real argument.

use crate::error::{Error, Result};
use crate::special::ln_gamma;

pub const MAX_ARGUMENT: f64 = 200.0;
const SERIES_LIMIT: f64 = 20.0;

fn check(t: f64) -> Result<()> {
    if !(0.0..=MAX_ARGUMENT).contains(&t) {
        return Err(Error::Domain(format!(
            "Bessel argument {t} outside [0, {MAX_ARGUMENT}]"
        )));
    }
    Ok(())
}

/// `I_ν(t)`.
pub fn modified_bessel_i(order: usize, t: f64) -> Result<f64> {
    check(t)?;
    if t <= SERIES_LIMIT {
        Ok(power_series(order, t))
    } else {
        Ok(miller_scaled(order, t) * t.exp())
    }
}

/// `e^{-t} I_ν(t)`, which stays O(1) across the whole range.
pub fn modified_bessel_i_scaled(order: usize, t: f64) -> Result<f64> {
    check(t)?;
    if t <= SERIES_LIMIT {
        Ok(power_series(order, t) * (-t).exp())
    } else {
        Ok(miller_scaled(order, t))
    }
}

/// `Σ_k (t/2)^{2k+ν} / (k! (k+ν)!)`; all terms positive.
pub(crate) fn power_series(order: usize, t: f64) -> f64 {
    if t == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let nu = order as f64;
    let half = 0.5 * t;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let q = half * half;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Backward recurrence `I_{k-1} = (2k/t) I_k + I_{k+1}` from a start index
/// past the decay region, normalized by `e^t = I_0 + 2 Σ_{k≥1} I_k`.
pub(crate) fn miller_scaled(order: usize, t: f64) -> f64 {
    let reach = (order as f64).max(t);
    let start = (reach + 20.0 + 10.0 * reach.sqrt()).ceil() as usize + 1;
    let mut upper = 0.0; // y_{k+1}
    let mut current = 1e-280; // y_k
    let mut sum = 0.0; // 2 Σ_{j≥k} y_j  (j ≥ 1)
    let mut wanted = if order == start { current } else { 0.0 };
    let mut k = start;
    while k > 0 {
        sum += 2.0 * current;
        let lower = (2.0 * k as f64 / t) * current + upper;
        upper = current;
        current = lower;
        k -= 1;
        if k == order {
            wanted = current;
        }
        if current > 1e250 {
            current *= 1e-250;
            upper *= 1e-250;
            sum *= 1e-250;
            wanted *= 1e-250;
        }
    }
    // current = y_0
    wanted / (current + sum)
}
