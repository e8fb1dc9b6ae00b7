//! Gamma-function plumbing shared by the coefficient and quadrature code.

use std::f64::consts::LN_2;

/// `ln |Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    let (value, sign) = libm::lgamma_r(x);
    (value, if sign < 0 { -1.0 } else { 1.0 })
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    libm::lgamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln μ_{α,β}([-1,1]) = ln(2^{α+β+1} B(α+1, β+1))`.
pub fn ln_total_mass(alpha: f64, beta: f64) -> f64 {
    (alpha + beta + 1.0) * LN_2 + ln_beta(alpha + 1.0, beta + 1.0)
}

pub fn total_mass(alpha: f64, beta: f64) -> f64 {
    ln_total_mass(alpha, beta).exp()
}
