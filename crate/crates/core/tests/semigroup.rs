mod common;

use common::{
    legendre_poisson_origin, params, poisson_kernel_brute_force, random_normalized,
    random_sequence, rng,
};
use jacobi_heat::semigroup::*;
use jacobi_heat::FiniteSequence;
use rand::Rng;

#[test]
fn semigroup_law_on_random_inputs() {
    let p = params(0.0, 0.0);
    let mut r = rng(2);
    let times = [0.1, 1.0, 5.0];
    for _ in 0..20 {
        let support = r.gen_range(0..=20);
        let f = random_sequence(&mut r, support);
        for &t1 in &times {
            for &t2 in &times {
                let inner = apply_heat(p, t2, &f, 150).unwrap();
                let composed = apply_heat(p, t1, &inner, 150).unwrap();
                let direct = apply_heat(p, t1 + t2, &f, 150).unwrap();
                let err = composed.sub(&direct).norm_l2();
                assert!(err < 1e-7, "t1={t1} t2={t2}: {err}");
            }
        }
    }
}

#[test]
fn semigroup_law_for_other_parameters() {
    let mut r = rng(3);
    for (al, be) in [(1.0, 0.5), (-0.5, -0.5), (2.0, -0.4)] {
        let p = params(al, be);
        let f = random_sequence(&mut r, 10);
        let composed = apply_heat(p, 1.0, &apply_heat(p, 5.0, &f, 150).unwrap(), 150).unwrap();
        let direct = apply_heat(p, 6.0, &f, 150).unwrap();
        assert!(composed.sub(&direct).norm_l2() < 1e-7, "({al},{be})");
    }
}

#[test]
fn chapman_kolmogorov_examples() {
    let p = params(0.0, 0.0);
    assert!(chapman_kolmogorov_check(p, 0.0, 0.0, 3, 3, 10).unwrap() < 1e-10);
    assert!(chapman_kolmogorov_check(p, 0.0, 2.5, 1, 4, 10).unwrap() < 1e-10);
    assert!(chapman_kolmogorov_check(p, 1.0, 2.0, 0, 4, 120).unwrap() < 1e-8);
    // the residual shrinks as the truncation grows, down to rounding
    let residuals: Vec<f64> = [5, 10, 20, 40]
        .iter()
        .map(|&tr| chapman_kolmogorov_check(p, 30.0, 30.0, 0, 4, tr).unwrap())
        .collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
    assert!(residuals[3] < 1e-13);
}

#[test]
fn heat_is_an_l2_contraction() {
    let mut r = rng(4);
    for (al, be) in [(0.0, 0.0), (-0.5, -0.5), (1.5, 0.5), (-0.8, 2.0)] {
        let p = params(al, be);
        for _ in 0..10 {
            let support = r.gen_range(0..=25);
            let f = random_sequence(&mut r, support);
            for t in [1e-3, 0.1, 1.0, 10.0, 100.0] {
                let u = apply_heat(p, t, &f, default_truncation(support, t)).unwrap();
                assert!(u.norm_l2() <= f.norm_l2() + 1e-12, "({al},{be}) t={t}");
            }
        }
    }
}

#[test]
fn heat_is_strongly_continuous_at_zero() {
    // with ‖f‖₂ = 1/2 and ‖𝒥‖ ≤ 2, ‖W_h f - f‖₂ ≤ h
    let mut r = rng(6);
    for (al, be) in [(0.0, 0.0), (0.5, 0.2), (-0.5, -0.5)] {
        let p = params(al, be);
        for _ in 0..5 {
            let f = random_normalized(&mut r, 20, 0.5);
            let errors: Vec<f64> = (0..=20)
                .map(|k| {
                    let t = 0.5f64.powi(k);
                    apply_heat(p, t, &f, default_truncation(f.support(), t))
                        .unwrap()
                        .sub(&f)
                        .norm_l2()
                })
                .collect();
            assert!(
                errors.windows(2).all(|w| w[1] < w[0]),
                "({al},{be}) {errors:?}"
            );
            assert!(errors[20] < 1e-6, "({al},{be}) {}", errors[20]);
        }
    }
}

#[test]
fn energy_decreases_along_the_evolution() {
    let p = params(0.0, 0.0);
    let grid = TimeGrid::new(vec![0.0, 0.5, 1.0, 2.0]).unwrap();
    let trace = evolve_ivp(p, &FiniteSequence::delta(0), &grid, None).unwrap();
    assert!((trace.energies[0] - 0.5).abs() < 1e-15);
    assert!(trace.energies.windows(2).all(|e| e[1] < e[0]));
    assert!(trace.max_energy_slope() <= 1e-8);
}

#[test]
fn energy_rate_matches_dissipation() {
    let mut r = rng(9);
    for (al, be) in [(0.0, 0.0), (1.0, 0.5), (-0.5, -0.5)] {
        let p = params(al, be);
        let f = random_sequence(&mut r, 12);
        let grid = TimeGrid::new(vec![0.0, 0.01, 0.3, 1.0, 4.0, 10.0]).unwrap();
        let checks = energy_checks(p, &f, &grid, None).unwrap();
        let trace = evolve_ivp(p, &f, &grid, None).unwrap();
        assert!(trace.max_energy_slope() <= 1e-8);
        for c in &checks {
            assert!(c.energy_rate <= 0.0 && c.dissipation <= 0.0);
            assert!(c.relative_mismatch < 1e-6, "({al},{be}) {c:?}");
            // Taylor remainder of the forward difference: (h/2)‖𝒥²u‖ ≤ 2h‖f‖
            assert!(
                c.pde_residual <= 2.0 * FD_STEP * f.norm_l2(),
                "({al},{be}) {c:?}"
            );
        }
    }
}

#[test]
fn poisson_at_time_zero_and_zero_input() {
    let p = params(0.4, -0.2);
    let f = FiniteSequence::new(vec![0.5, -1.0, 2.0]);
    let u = apply_poisson(p, 0.0, &f, 6, Subordination::default()).unwrap();
    assert!(u.sub(&f).norm_sup() < 1e-10);
    assert!(apply_poisson(
        p,
        1.0,
        &FiniteSequence::zeros(3),
        6,
        Subordination::default()
    )
    .unwrap()
    .is_zero());
}

#[test]
fn poisson_matches_brute_force_and_closed_form() {
    let p = params(0.0, 0.0);
    for t in [0.25, 1.0, 3.0] {
        let u =
            apply_poisson(p, t, &FiniteSequence::delta(0), 4, Subordination::default()).unwrap();
        let brute = poisson_kernel_brute_force(p, t, 0, 0);
        assert!(
            (u.get(0) - brute).abs() < 1e-6,
            "t={t}: {} vs {brute}",
            u.get(0)
        );
        assert!(
            (u.get(0) - legendre_poisson_origin(t)).abs() < 1e-10,
            "t={t}"
        );
    }
    let q = params(1.0, 0.5);
    let u = apply_poisson(
        q,
        1.0,
        &FiniteSequence::delta(2),
        5,
        Subordination::default(),
    )
    .unwrap();
    assert!((u.get(3) - poisson_kernel_brute_force(q, 1.0, 2, 3)).abs() < 1e-6);
}

#[test]
fn gauss_laguerre_subordination_converges_slowly() {
    let p = params(0.0, 0.0);
    let exact = legendre_poisson_origin(1.0);
    let err = |nodes| {
        let u = apply_poisson(
            p,
            1.0,
            &FiniteSequence::delta(0),
            2,
            Subordination::GaussLaguerre { nodes },
        )
        .unwrap();
        (u.get(0) - exact).abs()
    };
    let (e64, e256) = (err(64), err(256));
    assert!(e256 < e64 / 10.0);
    assert!(e256 < 1e-6);
}

#[test]
fn maximal_function_examples() {
    let p = params(0.0, 0.0);
    let grid = TimeGrid::logarithmic(1e-6, 1e3, 40).unwrap();
    for n in [0, 3, 10] {
        assert!(maximal_heat(p, &FiniteSequence::delta(n), n, &grid).unwrap() >= 1.0 - 1e-6);
    }
    let grid = TimeGrid::logarithmic(1e-3, 1e3, 60).unwrap();
    let v = maximal_heat(p, &FiniteSequence::delta(0), 5, &grid).unwrap();
    assert!(v > 0.0 && v <= 1.0);
    // refining the grid never lowers the maximum
    let coarse = maximal_heat(
        p,
        &FiniteSequence::delta(0),
        5,
        &TimeGrid::logarithmic(1e-3, 1e3, 10).unwrap(),
    )
    .unwrap();
    assert!(coarse <= v);
}

#[test]
fn poisson_maximal_function_is_dominated() {
    // the grid must reach past the arrival time of the heat at the far end
    let grid = TimeGrid::logarithmic(1e-3, 1e4, 22).unwrap();
    let mut r = rng(12);
    for (al, be) in [(0.0, 0.0), (1.0, 0.5)] {
        let p = params(al, be);
        for f in [FiniteSequence::delta(0), random_sequence(&mut r, 8)] {
            let w = maximal_heat_profile(p, &f, &grid, 30).unwrap();
            let q = maximal_poisson_profile(p, &f, &grid, 30, Subordination::default()).unwrap();
            for n in 0..=30 {
                assert!(
                    q.get(n) <= w.get(n) + 1e-9,
                    "({al},{be}) n={n}: {} > {}",
                    q.get(n),
                    w.get(n)
                );
            }
        }
    }
}

#[test]
fn discrete_measure_matrix_matches_its_kernel() {
    let nodes = [-0.95, -0.6, -0.1, 0.3, 0.55, 0.8, 0.99];
    let weights = [0.05, 0.2, 0.1, 0.15, 0.25, 0.1, 0.15];
    let j = GeneralJacobiMatrix::from_discrete_measure(&nodes, &weights, 6).unwrap();
    for t in [0.5, 2.0, 10.0] {
        let e = matrix_exponential_kernel(&j, t, 7).unwrap();
        for m in 0..7 {
            for n in 0..7 {
                let k = discrete_measure_kernel(&j, &nodes, &weights, t, m, n).unwrap();
                assert!((e.get(m, n) - k).abs() < 1e-10, "t={t} ({m},{n})");
            }
        }
    }
}

#[test]
fn trace_exports() {
    let p = params(0.0, 0.0);
    let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
    let trace = evolve_ivp(p, &FiniteSequence::delta(1), &grid, Some(5)).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,n,value");
    assert_eq!(text.lines().count(), 1 + 2 * 6);
    let json: serde_json::Value = serde_json::from_str(&trace.to_json().unwrap()).unwrap();
    assert_eq!(json["energies"].as_array().unwrap().len(), 2);
}
