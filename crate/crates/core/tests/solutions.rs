use std::sync::Arc;

use cole_core::solutions::{
    cartesian_components, cole_hopf, main_example, nonstationary_erf, self_similar, stationary, ConstantHeat,
    HeatKernel, OffsetHeatKernel, Params, RadialSolution, SolutionFamily,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn central5(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Observed order of the five-point difference of `f` against `exact` when the
/// step halves. Points where the error has already reached rounding level are
/// reported as `None`.
fn observed_order(f: &dyn Fn(f64) -> f64, exact: f64, x: f64, h: f64, floor: f64) -> Option<f64> {
    let e1 = (central5(f, x, h) - exact).abs();
    let e2 = (central5(f, x, h / 2.0) - exact).abs();
    if e2 < floor {
        return None;
    }
    Some((e1 / e2).log2())
}

fn check_derivative_orders(s: &SolutionFamily<f64>, samples: &[(f64, f64)]) {
    let mut checked = 0;
    for &(t, r) in samples {
        let j = s.jet(t, r).unwrap();
        let w = (4.0 * s.params().mu * t).sqrt();
        let h = 0.05 * r.min(w).min(w * w / r);
        let floor_r = 1e-9 * (j.u.abs() / r + j.u_r.abs());
        let floor_rr = 1e-9 * (j.u_r.abs() / r + j.u_rr.abs());

        let u = |x: f64| s.u(t, x).unwrap();
        if let Some(p) = observed_order(&u, j.u_r, r, h, floor_r) {
            assert!(p >= 3.8, "{}: u_r order {p} at (t, r) = ({t}, {r})", s.label());
            checked += 1;
        }
        let ur = |x: f64| s.jet(t, x).unwrap().u_r;
        if let Some(p) = observed_order(&ur, j.u_rr, r, h, floor_rr) {
            assert!(p >= 3.8, "{}: u_rr order {p} at (t, r) = ({t}, {r})", s.label());
            checked += 1;
        }
        if !s.is_stationary() {
            let ut = |tt: f64| s.u(tt, r).unwrap();
            let floor_t = 1e-9 * (j.u.abs() / t + j.u_t.abs());
            if let Some(p) = observed_order(&ut, j.u_t, t, 0.02 * t / (r * r / (w * w)).max(1.0), floor_t) {
                assert!(p >= 3.8, "{}: u_t order {p} at (t, r) = ({t}, {r})", s.label());
                checked += 1;
            }
        }
    }
    assert!(checked >= samples.len(), "{}: only {checked} order checks were above rounding", s.label());
}

fn samples(seed: u64, mu: f64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t = 10f64.powf(rng.gen_range(-3.0..0.0));
            let rho = 10f64.powf(rng.gen_range(-1.0..0.5));
            (t, rho * (4.0 * mu * t).sqrt())
        })
        .collect()
}

#[test]
fn analytic_derivatives_converge_at_fourth_order() {
    let mu = 0.1;
    let families = vec![
        main_example(Params::new(2, mu).with_a(1.0)).unwrap(),
        main_example(Params::new(3, mu).with_a(1.0)).unwrap(),
        main_example(Params::new(5, mu).with_a(0.3)).unwrap(),
        self_similar(Params::new(3, mu).with_a(1.0)).unwrap(),
        self_similar(Params::new(4, mu).with_a(2.0)).unwrap(),
        stationary(Params::new(3, mu)).unwrap(),
        stationary(Params::new(4, mu).with_c(1.0)).unwrap(),
        stationary(Params::new(5, mu).with_c(0.5)).unwrap(),
        stationary(Params::new(2, mu).with_c(3.0)).unwrap(),
        nonstationary_erf(mu).unwrap(),
        cole_hopf(Arc::new(OffsetHeatKernel::new(3, mu, 0.5).unwrap()), mu).unwrap(),
    ];
    for (i, s) in families.iter().enumerate() {
        check_derivative_orders(s, &samples(17 + i as u64, mu, 24));
    }
}

#[test]
fn erf_family_derivatives_across_series_switch() {
    let s = nonstationary_erf(0.1).unwrap();
    let t = 0.05_f64;
    let w = (4.0 * 0.1 * t).sqrt();
    let pts: Vec<_> = [0.05, 0.2, 0.45, 0.55, 0.8].iter().map(|&y| (t, y * w)).collect();
    check_derivative_orders(&s, &pts);
}

#[test]
fn cole_hopf_of_offset_kernel_is_the_main_example() {
    for &(n, mu, a) in &[(2, 0.1, 1.0), (3, 0.1, 1.0), (3, 0.005, 1.0), (5, 0.3, 0.01), (7, 0.05, 4.0)] {
        let ch = cole_hopf(Arc::new(OffsetHeatKernel::new(n, mu, a).unwrap()), mu).unwrap();
        let me = main_example(Params::new(n, mu).with_a(a)).unwrap();
        for i in 0..40 {
            let t = 10f64.powf(-6.0 + 6.0 * i as f64 / 39.0);
            for k in 0..40 {
                let r = (4.0 * mu * t).sqrt() * 10f64.powf(-3.0 + 4.0 * k as f64 / 39.0);
                let (x, y) = (ch.u(t, r).unwrap(), me.u(t, r).unwrap());
                assert!((x - y).abs() <= 1e-13 * y.abs(), "n={n} t={t:e} r={r:e}: {x:e} vs {y:e}");
            }
        }
    }
}

#[test]
fn heat_kernel_transforms_to_r_over_t() {
    let ch = cole_hopf(Arc::new(HeatKernel::kernel(3, 0.2_f64).unwrap()), 0.2).unwrap();
    for &(t, r) in &[(1e-4_f64, 1e-3), (0.1, 2.0), (3.0, 0.5)] {
        let u = ch.u(t, r).unwrap();
        assert!((u - r / t).abs() <= 1e-14 * r / t);
    }
    let zero = cole_hopf(Arc::new(ConstantHeat::new(4, 3.0).unwrap()), 0.2).unwrap();
    assert_eq!(zero.u(0.1, 0.4).unwrap(), 0.0);
}

#[test]
fn main_example_limits() {
    let s = main_example(Params::new(3, 0.1_f64).with_a(1.0)).unwrap();
    assert_eq!(s.u(1e-3, 0.0).unwrap(), 0.0);
    let ts: Vec<f64> = (2..=10).map(|k| 10f64.powi(-k)).collect();
    let at_fixed: Vec<f64> = ts.iter().map(|&t| s.u(t, 0.5).unwrap()).collect();
    assert!(at_fixed.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0));
    assert!(*at_fixed.last().unwrap() < 1e-100);
    let on_parabola: Vec<f64> = ts.iter().map(|&t| s.u(t, t.sqrt()).unwrap()).collect();
    assert!(on_parabola.windows(2).all(|w| w[1] > w[0]));
    assert!(*on_parabola.last().unwrap() > 1e4);

    let degenerate = main_example(Params::new(3, 0.1_f64)).unwrap();
    assert!((degenerate.u(0.01, 0.3).unwrap() - 30.0).abs() < 1e-12);
}

#[test]
fn self_similar_origin_and_pointwise_limits() {
    for &(n, mu, a) in &[(3usize, 0.1, 1.0), (4, 0.05, 2.0), (6, 0.2, 0.5)] {
        let s = self_similar(Params::new(n, mu).with_a(a)).unwrap();
        let t = 0.01;
        let target = 2.0 * mu * (n as f64 - 2.0);
        let mut prev = f64::INFINITY;
        for k in 3..9 {
            let r = (4.0 * mu * t).sqrt() * 10f64.powi(-k);
            let err = (r * s.u(t, r).unwrap() - target).abs() / target;
            assert!(err < prev || err < 1e-14);
            prev = err;
        }
        assert!(prev < 1e-7, "n={n}: r u - 2 mu (n-2) relative gap {prev:e}");
        let fixed: Vec<f64> = (1..8).map(|k| s.u(10f64.powi(-k), 0.3).unwrap()).collect();
        assert!(fixed.windows(2).all(|w| w[1] <= w[0]));
        assert!(*fixed.last().unwrap() < 1e-100);
    }
}

#[test]
fn erf_family_limits() {
    let mu = 0.1;
    let s = nonstationary_erf(mu).unwrap();
    let st = stationary(Params::new(3, mu)).unwrap();
    let rbar = 0.3;
    let gap = |t: f64| (s.u(t, rbar).unwrap() - 2.0 * mu / rbar).abs();
    let gaps: Vec<f64> = (1..6).map(|k| gap(10f64.powi(-k))).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
    assert!(gaps[2] < 1e-10 && gaps[4] <= 4.0 * f64::EPSILON * 2.0 * mu / rbar);
    for &t in &[1e-3, 0.1, 10.0] {
        let near = s.u(t, 1e-9 * (mu * t).sqrt()).unwrap();
        assert!(near.abs() < 1e-8 * (mu / t).sqrt());
        assert_eq!(s.u(t, 0.0).unwrap(), 0.0);
    }
    let c0 = (s.u(0.01, 0.1).unwrap() - st.u(0.01, 0.1).unwrap()).abs() * 0.1;
    for k in 2..9 {
        let t = 10f64.powi(-k);
        let r = t.sqrt();
        let c = (s.u(t, r).unwrap() - st.u(t, r).unwrap()).abs() * r;
        assert!(c > 0.0);
        assert!((c - c0).abs() <= 1e-10 * c0, "t={t:e}: {c:e} vs {c0:e}");
    }
}

#[test]
fn stationary_special_values() {
    let s = stationary(Params::new(3, 0.1_f64)).unwrap();
    assert!((s.u(1.0, 1.0).unwrap() - 0.2).abs() < 1e-15);
    let s4 = stationary(Params::new(4, 0.1_f64).with_c(1.0)).unwrap();
    assert!((s4.u(1.0, 1.0).unwrap() - 0.2).abs() < 1e-15);
    assert!(s.u(1.0, 0.0).is_err());
}

fn fd_jacobian(s: &SolutionFamily<f64>, t: f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut jac = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let vp = cartesian_components(s, t, &xp).unwrap().value;
        let vm = cartesian_components(s, t, &xm).unwrap().value;
        for i in 0..n {
            jac[i][j] = (vp[i] - vm[i]) / (2.0 * h);
        }
    }
    jac
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn main_example_origin_derivatives() {
    for &(n, mu, a, t) in &[(3usize, 0.1, 1.0, 0.5), (4, 0.05, 0.2, 1e-3)] {
        let s = main_example(Params::new(n, mu).with_a(a)).unwrap();
        let c = cartesian_components(&s, t, &vec![0.0; n]).unwrap();
        let big_a = a * (4.0 * std::f64::consts::PI * mu * t).powf(n as f64 / 2.0);
        let expect = 1.0 / (t * (1.0 + big_a));
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { expect } else { 0.0 };
                assert!((c.jacobian[i][j] - e).abs() <= 1e-14 * expect);
            }
        }
        assert!(c.second_partials.iter().flatten().flatten().all(|&d| d == 0.0));
        assert!(c.value.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn jacobian_matches_central_differences_at_second_order() {
    let mu = 0.1;
    let t = 0.02;
    let cases: Vec<(SolutionFamily<f64>, Vec<f64>)> = vec![
        (main_example(Params::new(3, mu).with_a(1.0)).unwrap(), vec![0.05, 0.0, 0.0]),
        (main_example(Params::new(3, mu).with_a(1.0)).unwrap(), vec![0.03, -0.02, 0.04]),
        (self_similar(Params::new(3, mu).with_a(1.0)).unwrap(), vec![0.0, 0.06, 0.0]),
        (stationary(Params::new(4, mu).with_c(1.0)).unwrap(), vec![0.2, 0.1, -0.3, 0.05]),
        (nonstationary_erf(mu).unwrap(), vec![0.0, 0.0, 0.01]),
        (nonstationary_erf(mu).unwrap(), vec![0.05, 0.07, -0.02]),
    ];
    for (s, x) in &cases {
        let exact = cartesian_components(s, t, x).unwrap().jacobian;
        let h = 2e-3;
        let e1 = max_diff(&exact, &fd_jacobian(s, t, x, h));
        let e2 = max_diff(&exact, &fd_jacobian(s, t, x, h / 2.0));
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "{} at {x:?}: error ratio {ratio}", s.label());
    }
}

#[test]
fn second_partials_match_differences_of_jacobian() {
    let s = main_example(Params::new(3, 0.1_f64).with_a(1.0)).unwrap();
    let t = 0.02;
    let x = [0.03_f64, -0.02, 0.04];
    let exact = cartesian_components(&s, t, &x).unwrap().second_partials;
    let h = 1e-5;
    for k in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[k] += h;
        xm[k] -= h;
        let jp = cartesian_components(&s, t, &xp).unwrap().jacobian;
        let jm = cartesian_components(&s, t, &xm).unwrap().jacobian;
        for i in 0..3 {
            for j in 0..3 {
                let fd = (jp[i][j] - jm[i][j]) / (2.0 * h);
                let scale = exact[i][j][k].abs().max(1.0);
                assert!((fd - exact[i][j][k]).abs() <= 1e-6 * scale, "d_{j}{k} u_{i}");
            }
        }
    }
}

#[test]
fn frobenius_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let families = [
        main_example(Params::new(3, 0.1_f64).with_a(1.0)).unwrap(),
        main_example(Params::new(5, 0.1_f64).with_a(1.0)).unwrap(),
        self_similar(Params::new(4, 0.1_f64).with_a(1.0)).unwrap(),
        nonstationary_erf(0.1).unwrap(),
    ];
    for s in &families {
        let n = s.params().n;
        for _ in 0..50 {
            let t = 10f64.powf(rng.gen_range(-4.0..0.0));
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) * (0.4 * t).sqrt()).collect();
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let c = cartesian_components(s, t, &x).unwrap();
            let j = s.jet(t, r).unwrap();
            let radial = j.u_r * j.u_r + (n as f64 - 1.0) * (j.u / r).powi(2);
            assert!((c.frobenius_sq() - radial).abs() <= 1e-12 * radial, "{}", s.label());
        }
    }
}

proptest! {
    #[test]
    fn positive_profiles(log_t in -8.0..1.0f64, rho in -4.0..1.5f64, n in 3usize..8, log_a in -3.0..3.0f64) {
        let mu = 0.1;
        let t = 10f64.powf(log_t);
        let r = (4.0 * mu * t).sqrt() * 10f64.powf(rho);
        let a = 10f64.powf(log_a);
        let me = main_example(Params::new(n, mu).with_a(a)).unwrap();
        let ss = self_similar(Params::new(n, mu).with_a(a)).unwrap();
        let u = me.u(t, r).unwrap();
        prop_assert!(u > 0.0 || (r * r / (4.0 * mu * t) > 600.0 && u == 0.0));
        let v = ss.u(t, r).unwrap();
        prop_assert!(v > 0.0 || (r * r / (4.0 * mu * t) > 600.0 && v == 0.0));
    }

    #[test]
    fn self_similar_scaling_is_exact(log_t in -6.0..0.0f64, rho in -2.0..1.0f64, log_l in -2.0..2.0f64, n in 3usize..7) {
        let mu = 0.05;
        let s = self_similar(Params::new(n, mu).with_a(1.5)).unwrap();
        let t = 10f64.powf(log_t);
        let r = (4.0 * mu * t).sqrt() * 10f64.powf(rho);
        let lambda = 10f64.powf(log_l);
        let base = s.u(t, r).unwrap();
        let scaled = lambda * s.u(lambda * lambda * t, lambda * r).unwrap();
        prop_assert!((scaled - base).abs() <= 1e-12 * base);
    }

    #[test]
    fn main_example_bounded_by_degenerate_profile(log_t in -6.0..0.0f64, r in 0.0..2.0f64, n in 2usize..8) {
        let s = main_example(Params::new(n, 0.1).with_a(1.0)).unwrap();
        let t = 10f64.powf(log_t);
        prop_assert!(s.u(t, r).unwrap() <= r / t);
    }
}
