mod common;

use common::{
    bessel_i_scaled_by_trapezoid, chebyshev_kernel_by_theta, params, random_frak_spec, rng,
    LoweringCase,
};
use jacobi_heat::jacobi::eval_orthonormal_all;
use jacobi_heat::kernel::rule::{heat_rule, RulePath};
use jacobi_heat::kernel::*;
use jacobi_heat::semigroup::{matrix_exponential_kernel, GeneralJacobiMatrix};
use jacobi_heat::{CoefficientTable, Error};
use proptest::prelude::*;

/// Standard-range pairs with `α ≥ β`.
const POSITIVE_PAIRS: [(f64, f64); 5] = [
    (0.0, 0.0),
    (-0.5, -0.5),
    (0.5, -0.5),
    (1.0, 0.5),
    (2.5, 0.0),
];

/// Relative agreement `1e-10`, plus an absolute rounding allowance for the
/// direct quadrature, whose sum cancels from terms as large as `p_k(1)`.
fn h_t_agrees(k: usize, h: &HtCoefficient) -> bool {
    let rounding = 1e-15 * ((k + 1) * (k + 1)) as f64;
    (h.direct - h.rodrigues).abs() <= 1e-10 * h.rodrigues.abs() + rounding
}

#[test]
fn kronecker_rows_at_time_zero() {
    for (al, be) in [(0.0, 0.0), (0.5, 0.2), (-0.5, -0.5), (2.0, 0.3)] {
        let block = heat_kernel_block(params(al, be), 0.0, 31, 31, DEFAULT_KERNEL_TOL).unwrap();
        for m in 0..=30 {
            for n in 0..=30 {
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((block.get(m, n) - expected).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn kernel_is_symmetric_bit_for_bit() {
    let p = params(1.3, -0.2);
    for t in [0.3, 4.0, 60.0] {
        for (m, n) in [(0, 7), (3, 11), (12, 5)] {
            let a =
                heat_kernel(&KernelQuery::new(p, t, m, n).unwrap(), DEFAULT_KERNEL_TOL).unwrap();
            let b =
                heat_kernel(&KernelQuery::new(p, t, n, m).unwrap(), DEFAULT_KERNEL_TOL).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let block = heat_kernel_block(p, t, 15, 15, DEFAULT_KERNEL_TOL).unwrap();
        for m in 0..15 {
            for n in 0..15 {
                assert_eq!(block.get(m, n).to_bits(), block.get(n, m).to_bits());
            }
        }
    }
}

#[test]
fn doubled_rule_changes_kernel_by_little() {
    let p = params(0.4, 0.9);
    let table = CoefficientTable::new(p, 8);
    let entry = |level| {
        let rule = heat_rule(p, 5.0, 10, RulePath::GaussJacobi, level).unwrap();
        let mut v = vec![0.0; 8];
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .fold(0.0, |acc, (&x, &w)| {
                table.eval_all_into(x, &mut v);
                acc + w * v[3] * v[7]
            })
    };
    assert!((entry(0) - entry(1)).abs() < 1e-12);
    let k = heat_kernel(&KernelQuery::new(p, 5.0, 3, 7).unwrap(), DEFAULT_KERNEL_TOL).unwrap();
    assert!((k - entry(1)).abs() < 1e-12);
}

#[test]
fn quadrature_kernel_matches_matrix_exponential() {
    for (al, be) in [(0.0, 0.0), (1.0, 0.5), (-0.5, 0.3)] {
        let p = params(al, be);
        let j = GeneralJacobiMatrix::from_params(p, 200);
        for t in [0.5, 2.0, 10.0] {
            let e = matrix_exponential_kernel(&j, t, 201).unwrap();
            let k = heat_kernel_block(p, t, 21, 21, DEFAULT_KERNEL_TOL).unwrap();
            for m in 0..=20 {
                for n in 0..=20 {
                    assert!(
                        (e.get(m, n) - k.get(m, n)).abs() < 1e-8,
                        "({al},{be}) t={t} ({m},{n})"
                    );
                }
            }
        }
    }
}

#[test]
fn bessel_functions_against_the_integral() {
    assert_eq!(modified_bessel_i(0, 0.0).unwrap(), 1.0);
    assert_eq!(modified_bessel_i(3, 0.0).unwrap(), 0.0);
    assert!((modified_bessel_i(0, 1.0).unwrap() - 1.2660658778).abs() < 1e-10);
    for t in [0.1, 1.0, 7.5, 19.0, 25.0, 80.0, 200.0] {
        for order in [0, 1, 2, 5, 13, 30] {
            let oracle = bessel_i_scaled_by_trapezoid(order, t);
            let value = modified_bessel_i_scaled(order, t).unwrap();
            // the trapezoid sum cancels down from terms of size one
            assert!(
                (value - oracle).abs() <= 1e-12 * oracle.max(1e-4),
                "I_{order}({t}): {value} vs {oracle}"
            );
        }
    }
    assert!(modified_bessel_i(0, 201.0).is_err());
}

#[test]
fn chebyshev_closed_form_matches_theta_integral_and_quadrature() {
    let p = params(-0.5, -0.5);
    for t in [0.0, 0.1, 1.0, 3.0, 10.0, 20.0] {
        let block = heat_kernel_block(p, t, 16, 16, DEFAULT_KERNEL_TOL).unwrap();
        for m in 0..=15 {
            for n in 0..=15 {
                let closed = cheb_heat_closed_form(t, m, n).unwrap();
                let theta = chebyshev_kernel_by_theta(t, m, n);
                assert!(
                    (closed - theta).abs() < 1e-12,
                    "t={t} ({m},{n}): {closed} vs {theta}"
                );
                assert!((closed - block.get(m, n)).abs() < 1e-9, "t={t} ({m},{n})");
            }
        }
    }
}

#[test]
fn kernel_is_non_negative_in_the_positive_regime() {
    for (al, be) in POSITIVE_PAIRS {
        let p = params(al, be);
        assert!(al >= be && be >= -0.5);
        for t in [0.1, 1.0, 10.0, 100.0] {
            let block = heat_kernel_block(p, t, 26, 26, DEFAULT_KERNEL_TOL).unwrap();
            let min = block.values.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-12, "({al},{be}) t={t}: {min}");
        }
    }
}

#[test]
fn h_t_is_non_negative_and_both_formulas_agree() {
    for (al, be) in POSITIVE_PAIRS {
        let p = params(al, be);
        for t in [0.1, 1.0, 10.0, 100.0] {
            for k in 0..=25 {
                let h = h_t_coefficient(p, t, k, DEFAULT_KERNEL_TOL).unwrap();
                assert!(h.rodrigues >= 0.0);
                assert!(h_t_agrees(k, &h), "({al},{be}) t={t} k={k}: {h:?}");
            }
        }
    }
    let h = h_t_coefficient(params(0.3, 0.1), 4.0, 2, DEFAULT_KERNEL_TOL).unwrap();
    assert!(h.value() >= 0.0);
    assert!((h.direct - h.rodrigues).abs() <= 1e-10 * h.rodrigues);
}

#[test]
fn negative_linearization_coefficient_outside_v() {
    let p = params(-0.6, -0.9);
    assert!(!p.in_region_v());
    let mut worst = (0.0, 0, 0, 0);
    for m in 0..=12 {
        for n in 0..=12 {
            let row = linearization_coefficients(p, m, n).unwrap();
            for k in row.k_min()..=row.k_max() {
                if row.get(k) < worst.0 {
                    worst = (row.get(k), k, m, n);
                }
            }
        }
    }
    assert!(worst.0 < -1e-10, "{worst:?}");
}

#[test]
fn linearization_coefficients_are_non_negative_inside_v() {
    for (al, be) in POSITIVE_PAIRS {
        let p = params(al, be);
        for m in 0..=10 {
            for n in 0..=10 {
                let row = linearization_coefficients(p, m, n).unwrap();
                assert!(
                    row.coefficients.iter().all(|&c| c >= -1e-12),
                    "({al},{be}) {m},{n}"
                );
            }
        }
    }
}

#[test]
fn triple_products_vanish_outside_the_band() {
    let p = params(0.8, -0.3);
    for (m, n) in [(3, 5), (6, 6), (0, 4)] {
        let row = linearization_coefficients(p, m, n).unwrap();
        for k in 0..=m + n + 3 {
            if k < row.k_min() || k > row.k_max() {
                assert!(
                    triple_product_integral(p, m, n, k).unwrap().abs() <= 1e-12,
                    "{m},{n},{k}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_reconstruct_from_linearization(
        al in -0.9..2.5f64, be in -0.9..2.5f64, m in 0usize..12, n in 0usize..12, x in -1.0..=1.0f64
    ) {
        let p = params(al, be);
        let row = linearization_coefficients(p, m, n).unwrap();
        let v = eval_orthonormal_all(&p, m + n, x).unwrap();
        let rhs: f64 = (row.k_min()..=row.k_max()).map(|k| row.get(k) * v[k]).sum();
        prop_assert!((v[m] * v[n] - rhs).abs() < 1e-9, "{} vs {}", v[m] * v[n], rhs);
    }
}

#[test]
fn translated_h_t_reproduces_the_kernel() {
    let cases = [
        (0.5, 0.5, 1.0, 2, 3),
        (0.0, 0.0, 0.3, 4, 1),
        (-0.5, -0.5, 2.0, 6, 6),
        (1.0, 0.5, 5.0, 0, 5),
    ];
    for (al, be, t, m, n) in cases {
        let p = params(al, be);
        let h = h_t_sequence(p, t, DEFAULT_KERNEL_TOL).unwrap();
        let tau = translation(p, n, &h).unwrap();
        let k = heat_kernel(&KernelQuery::new(p, t, m, n).unwrap(), DEFAULT_KERNEL_TOL).unwrap();
        assert!(
            (tau.get(m) - k).abs() < 1e-9,
            "({al},{be}) t={t} ({m},{n}): {} vs {k}",
            tau.get(m)
        );
    }
}

#[test]
fn lowering_identities_on_random_specs() {
    let mut r = rng(51);
    for case in [
        LoweringCase::BothPositive,
        LoweringCase::FirstZero,
        LoweringCase::SecondZero,
    ] {
        for _ in 0..50 {
            let spec = random_frak_spec(&mut r, case);
            let direct = frak_i_direct(&spec, DEFAULT_KERNEL_TOL).unwrap();
            let recursive = frak_i_recursive(&spec, DEFAULT_KERNEL_TOL).unwrap();
            assert!(
                (direct - recursive).abs() <= 1e-9 * direct.abs().max(1.0),
                "{spec:?}: {direct} vs {recursive}"
            );
        }
    }
}

#[test]
fn degenerate_lowering_is_reported() {
    let spec = FrakISpec::new(0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 3, 3, 1.0).unwrap();
    assert!(matches!(
        frak_i_recursive(&spec, 1e-12),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn kernel_grid_csv_layout() {
    let grid =
        KernelGrid::compute(params(0.0, 0.0), &[0.0, 1.0], 3, 2, DEFAULT_KERNEL_TOL).unwrap();
    let mut buf = Vec::new();
    grid.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,m,n,value");
    assert_eq!(lines.len(), 1 + 2 * 4 * 3);
    assert!(lines[1].starts_with("0.0,0,0,"));
    let json: serde_json::Value = serde_json::from_str(&grid.to_json().unwrap()).unwrap();
    assert_eq!(json["blocks"].as_array().unwrap().len(), 2);
}
