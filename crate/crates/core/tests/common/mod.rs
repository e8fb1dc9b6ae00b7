//! Independent oracles and random inputs shared by the integration tests.
#![allow(dead_code)]

use jacobi_heat::kernel::{heat_kernel, FrakISpec, KernelQuery};
use jacobi_heat::{FiniteSequence, JacobiParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn params(alpha: f64, beta: f64) -> JacobiParams {
    JacobiParams::new(alpha, beta).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform entries in `[-1, 1]` on `0..=support`.
pub fn random_sequence(rng: &mut ChaCha8Rng, support: usize) -> FiniteSequence {
    FiniteSequence::new((0..=support).map(|_| rng.gen_range(-1.0..=1.0)).collect())
}

/// Random sequence with support at most `max_support`, scaled to `‖f‖₂ = norm`.
pub fn random_normalized(rng: &mut ChaCha8Rng, max_support: usize, norm: f64) -> FiniteSequence {
    let support = rng.gen_range(0..=max_support);
    let f = random_sequence(rng, support);
    let scale = norm / f.norm_l2();
    f.scaled(scale)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix, by
/// the Sturm sequence of leading principal minors.
pub fn sturm_count(diagonal: &[f64], offdiagonal: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diagonal.iter().enumerate() {
        let off = if i == 0 { 0.0 } else { offdiagonal[i - 1] };
        q = d - x - off * off / q;
        if q == 0.0 {
            q = f64::EPSILON * (off.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues, ascending, by bisection on the Sturm count.
pub fn bisection_eigenvalues(diagonal: &[f64], offdiagonal: &[f64]) -> Vec<f64> {
    let radius = diagonal
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let left = if i > 0 { offdiagonal[i - 1].abs() } else { 0.0 };
            let right = offdiagonal.get(i).map_or(0.0, |v| v.abs());
            d.abs() + left + right
        })
        .fold(0.0, f64::max);
    (0..diagonal.len())
        .map(|k| {
            let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(diagonal, offdiagonal, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// `I_ν(t) e^{-t} = (1/π) ∫_0^π e^{t(cos θ - 1)} cos(νθ) dθ` by the trapezoid
/// rule, which is spectrally accurate for this periodic integrand.
pub fn bessel_i_scaled_by_trapezoid(order: usize, t: f64) -> f64 {
    let panels = 4000;
    let h = PI / panels as f64;
    let f = |theta: f64| (t * (theta.cos() - 1.0)).exp() * (order as f64 * theta).cos();
    let inner: f64 = (1..panels).map(|k| f(k as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

/// Chebyshev heat kernel `∫_0^π e^{-t(1-cos θ)} p_m(cos θ) p_n(cos θ) dθ`
/// with `p_0 = 1/√π`, `p_k = √(2/π) cos kθ`, by the trapezoid rule in `θ`.
pub fn chebyshev_kernel_by_theta(t: f64, m: usize, n: usize) -> f64 {
    let panels = 4000;
    let h = PI / panels as f64;
    let p = |k: usize, theta: f64| {
        if k == 0 {
            PI.sqrt().recip()
        } else {
            (2.0 / PI).sqrt() * (k as f64 * theta).cos()
        }
    };
    let f = |theta: f64| (-t * (1.0 - theta.cos())).exp() * p(m, theta) * p(n, theta);
    let inner: f64 = (1..panels).map(|k| f(k as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h
}

/// Exact `P_t δ_0(0)` for `α = β = 0`: `½ ∫ e^{-t√(1-x)} dx = [1 - (1 + √2 t) e^{-√2 t}] / t²`.
pub fn legendre_poisson_origin(t: f64) -> f64 {
    let r = std::f64::consts::SQRT_2 * t;
    (1.0 - (1.0 + r) * (-r).exp()) / (t * t)
}

/// Subordination integral for `P_t` kernel entries by composite Simpson in
/// `v` with `u = v²`: `(2/√π) ∫_0^8 e^{-v²} K_{t²/(4v²)}(m, n) dv`, 10,000
/// intervals. The integrand vanishes at `v = 0`, where `s → ∞`.
pub fn poisson_kernel_brute_force(p: JacobiParams, t: f64, m: usize, n: usize) -> f64 {
    let intervals = 10_000;
    let upper = 8.0;
    let h = upper / intervals as f64;
    let g = |v: f64| {
        if v == 0.0 {
            return 0.0;
        }
        let s = t * t / (4.0 * v * v);
        let k = heat_kernel(&KernelQuery::new(p, s, m, n).unwrap(), 1e-13).unwrap();
        (-v * v).exp() * k
    };
    let mut sum = g(0.0) + g(upper);
    for i in 1..intervals {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * g(i as f64 * h);
    }
    2.0 / PI.sqrt() * sum * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoweringCase {
    BothPositive,
    FirstZero,
    SecondZero,
}

/// Random 𝔍 spec for one lowering case: exponents in `(-0.9, 2)`, degrees
/// in `1..=8`, `t` in `[0, 10)`, rejecting `|n(n+a+b+1) - m(m+A+B+1)| < 0.1`.
pub fn random_frak_spec(rng: &mut ChaCha8Rng, case: LoweringCase) -> FrakISpec {
    loop {
        let mut e = || rng.gen_range(-0.9..2.0);
        let (a, b, big_a, big_b, alpha, beta) = (e(), e(), e(), e(), e(), e());
        let n = if case == LoweringCase::FirstZero {
            0
        } else {
            rng.gen_range(1..=8)
        };
        let m = if case == LoweringCase::SecondZero {
            0
        } else {
            rng.gen_range(1..=8)
        };
        let t = rng.gen_range(0.0..10.0);
        let gap = n as f64 * (n as f64 + a + b + 1.0) - m as f64 * (m as f64 + big_a + big_b + 1.0);
        if gap.abs() >= 0.1 {
            return FrakISpec::new(a, b, big_a, big_b, alpha, beta, n, m, t).unwrap();
        }
    }
}
