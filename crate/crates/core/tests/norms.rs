use cole_core::norms::{
    decay_fit, default_t_grid, grad_lp_norm, hess_bound_lp, linf_norm, ln_gradient_frobenius, ln_hessian_frobenius,
    log_grid, lp_distance, lp_norm, norm_report, NormKind, NormReport, NormSpec, PointFlag,
};
use cole_core::quadrature::lemma2_j_via_i;
use cole_core::solutions::{
    cartesian_components, main_example, nonstationary_erf, self_similar, stationary, Params, RadialSolution,
    SolutionFamily,
};
use cole_core::specfun::erf;
use cole_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn ubar(n: usize) -> SolutionFamily<f64> {
    main_example(Params::new(n, 0.1).with_a(1.0)).unwrap()
}

fn lp(kind: NormKind, p: f64, n: usize) -> NormSpec<f64> {
    NormSpec::new(kind, p, n).unwrap()
}

/// Li_2(x) for x in [-1, 0) by its power series.
fn dilog_small(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = x;
    for k in 1..2000 {
        let term = power / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        power *= x;
    }
    sum
}

/// -Li_2(-x) for x > 1 via the inversion formula.
fn minus_dilog_neg(x: f64) -> f64 {
    PI * PI / 6.0 + 0.5 * x.ln().powi(2) + dilog_small(-1.0 / x)
}

#[test]
fn l1_norm_n3_matches_dilogarithm() {
    // int_0^inf r^3 / (t (1 + A e^{r^2/4 mu t})) dr = 8 mu^2 t (-Li_2(-1/A))
    let mu = 0.1;
    for &t in &[1e-2, 1e-4, 1e-6, 1e-8] {
        let big_a: f64 = (4.0 * PI * mu * t).powf(1.5);
        let exact = 4.0 * PI * 8.0 * mu * mu * t * minus_dilog_neg(1.0 / big_a);
        let got = lp_norm(&ubar(3), 1.0, t).unwrap();
        assert!((got.value - exact).abs() <= 1e-10 * exact, "t = {t:e}: {} vs {exact}", got.value);
        assert!(got.quad_error <= 1e-9 * exact);
    }
}

/// int_0^inf y^2 e^{-p y^2} / erf(y)^p dy by composite Simpson on [0, 12].
fn erf_profile_integral(p: f64) -> f64 {
    let f = |y: f64| {
        if y == 0.0 {
            return if p == 2.0 { PI / 4.0 } else { 0.0 };
        }
        y * y * (-p * y * y).exp() / erf(y).powf(p)
    };
    let m = 200_000;
    let h = 12.0 / m as f64;
    let mut s = f(0.0) + f(12.0);
    for i in 1..m {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn erf_family_distance_matches_profile_integral() {
    // u_nst - u_st = -2 mu e^{-y^2} / (sqrt(mu pi t) erf(y)), y = r / sqrt(4 mu t)
    let mu = 0.1;
    let nst = nonstationary_erf(mu).unwrap();
    let st = stationary(Params::new(3, mu)).unwrap();
    for p in [1.0, 2.0] {
        let profile = erf_profile_integral(p);
        for &t in &[1e-2, 1e-5, 1e-8] {
            let amp = 2.0 * mu / (mu * PI * t).sqrt();
            let exact = (4.0 * PI * amp.powf(p) * (4.0 * mu * t).powf(1.5) * profile).powf(1.0 / p);
            let got = lp_distance(&nst, &st, p, t).unwrap().value;
            assert!((got - exact).abs() <= 1e-9 * exact, "p = {p}, t = {t:e}: {got} vs {exact}");
        }
    }
    assert!(matches!(lp_distance(&nst, &st, 3.0, 1e-3), Err(Error::Divergent(_))));
}

#[test]
fn distance_to_self_is_zero() {
    let s = ubar(3);
    assert_eq!(lp_distance(&s, &s, 1.5, 1e-4).unwrap().value, 0.0);
}

#[test]
fn stationary_and_degenerate_profiles_diverge() {
    let st = stationary(Params::new(3, 0.1)).unwrap();
    let degenerate = main_example(Params::new(3, 0.1).with_a(0.0)).unwrap();
    for p in [1.0, 2.0, 3.0, 4.0] {
        assert!(matches!(lp_norm(&st, p, 1e-3), Err(Error::Divergent(_))), "stationary p = {p}");
        assert!(matches!(lp_norm(&degenerate, p, 1e-3), Err(Error::Divergent(_))), "a = 0, p = {p}");
    }
    let pole = stationary(Params::new(3, 0.1).with_c(-1.0)).unwrap();
    assert!(matches!(lp_norm(&pole, 1.0, 1e-3), Err(Error::Divergent(_))));
}

#[test]
fn report_keeps_every_grid_point() {
    let st = stationary(Params::new(3, 0.1)).unwrap();
    let ts = default_t_grid();
    let r = norm_report(&st, &lp(NormKind::Lp, 2.0, 3), None, &ts);
    assert_eq!(r.values.len(), ts.len());
    assert!(r.flags.iter().all(|f| *f == PointFlag::Divergent));
    assert!(matches!(decay_fit(&r), Err(Error::DegenerateFit(_))));
}

#[test]
fn main_example_l1_vanishes_and_l4_grows() {
    let ts = default_t_grid();
    let l1 = norm_report(&ubar(3), &lp(NormKind::Lp, 1.0, 3), None, &ts);
    assert!(l1.strictly_decreasing());
    assert!(l1.final_ratio().unwrap() < 1e-3);
    let l4 = norm_report(&ubar(3), &lp(NormKind::Lp, 4.0, 3), None, &ts);
    assert!(l4.strictly_increasing());
}

#[test]
fn criticality_dichotomy_at_small_times() {
    // log factors delay the decay for p close to n; the split at p = n
    // shows once ln(1/t) is large
    let ts = log_grid(1e-30, 1e-300, 10).unwrap();
    for p in [1.0, 2.0, 2.9] {
        let r = norm_report(&ubar(3), &lp(NormKind::Lp, p, 3), None, &ts);
        assert!(r.strictly_decreasing(), "p = {p}: {:?}", r.values);
    }
    for p in [3.1, 4.0] {
        let r = norm_report(&ubar(3), &lp(NormKind::Lp, p, 3), None, &ts);
        assert!(r.strictly_increasing(), "p = {p}: {:?}", r.values);
    }
}

#[test]
fn linf_blows_up_along_t_sequence() {
    let ts = default_t_grid();
    let r = norm_report(&ubar(3), &lp(NormKind::Linf, 1.0, 3), None, &ts);
    assert!(r.strictly_increasing());
    assert!(r.final_ratio().unwrap() > 1e3);
    // grows like t^{-1/2} up to logs: about 3.0e4 at t = 1e-8, far short of 1e6
    let last = *r.values.last().unwrap();
    assert!((2.9e4..3.1e4).contains(&last), "{last:e}");
    // the maximiser is a critical point and beats a dense scan
    let s = ubar(3);
    for (&t, argmax) in ts.iter().zip(&r.argmax) {
        let r0 = argmax.unwrap();
        let j = s.jet(t, r0).unwrap();
        assert!(j.u_r.abs() * r0 <= 1e-6 * j.u, "t = {t:e}");
        let scan = (1..4000).map(|k| s.u(t, r0 * k as f64 / 2000.0).unwrap()).fold(0.0, f64::max);
        assert!(j.u >= scan * (1.0 - 1e-12));
    }
}

#[test]
fn linf_flags_unbounded_profiles() {
    let st = stationary(Params::new(3, 0.1)).unwrap();
    assert!(linf_norm(&st, 1e-3).unwrap().unbounded);
    let r = norm_report(&st, &lp(NormKind::Linf, 1.0, 3), None, &[1e-3, 1e-4]);
    assert!(r.flags.iter().all(|f| *f == PointFlag::Unbounded));
}

#[test]
fn self_similar_decay_is_an_exact_power_law() {
    let ts = default_t_grid();
    for (n, p) in [(3usize, 1.0), (3, 2.0), (4, 2.0)] {
        let s = self_similar(Params::new(n, 0.1).with_a(1.0)).unwrap();
        let fit = decay_fit(&norm_report(&s, &lp(NormKind::Lp, p, n), None, &ts)).unwrap();
        let expect = (n as f64 - p) / (2.0 * p);
        assert!((fit.slope - expect).abs() < 1e-8, "({n}, {p}): {}", fit.slope);
        assert!(fit.max_log_residual < 1e-8);
    }
}

#[test]
fn frobenius_integrands_match_cartesian_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let n = rng.gen_range(2..6);
        let s = ubar(n);
        let t = 10f64.powf(rng.gen_range(-6.0..-1.0));
        let width = (4.0 * 0.1 * t).sqrt();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0) * width).collect();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let c = cartesian_components(&s, t, &x).unwrap();
        let q = s.quotients(t, r).unwrap();
        let grad_sq = c.frobenius_sq();
        assert!(((2.0 * ln_gradient_frobenius(&q, r, n)).exp() - grad_sq).abs() <= 1e-12 * grad_sq);
        let hess_sq: f64 = c.second_partials.iter().flatten().flatten().map(|v| v * v).sum();
        let got = (2.0 * ln_hessian_frobenius(&q, r, n)).exp();
        assert!((got - hess_sq).abs() <= 1e-10 * hess_sq, "n = {n}: {got} vs {hess_sq}");
    }
}

#[test]
fn gradient_norm_below_triangle_bound() {
    for (n, p) in [(5usize, 2.0), (3, 2.0), (4, 1.0), (7, 3.0)] {
        for &t in &[1e-2, 1e-5, 1e-8] {
            let g = grad_lp_norm(&ubar(n), p, t).unwrap();
            let bound = g.bound.unwrap();
            assert!(g.norm.value <= bound && g.norm.value <= 2.0 * bound, "({n}, {p}) t = {t:e}");
        }
    }
    assert!(grad_lp_norm(&self_similar(Params::new(3, 0.1).with_a(1.0)).unwrap(), 1.0, 1e-3).unwrap().bound.is_none());
}

#[test]
fn hessian_bound_terms_match_substituted_lemma() {
    let (mu, n, p, t) = (0.1, 7usize, 2.0, 1e-4);
    let h = hess_bound_lp(&ubar(n), p, t).unwrap();
    let b = (4.0 * PI * mu).powf(n as f64 / 2.0);
    let nf = n as f64;
    let params = [(-p, nf - p - 1.0), (-2.0 * p, p + nf - 1.0), (-3.0 * p, 3.0 * p + nf - 1.0)];
    for (term, (d, c)) in h.terms.iter().zip(params) {
        let oracle = lemma2_j_via_i(d, c, b, p, n, mu, t).unwrap().value;
        assert!((term.value - oracle).abs() <= 1e-9 * oracle);
    }
    assert!((h.value - h.sum.powf(1.0 / p)).abs() <= 1e-14 * h.value);
    let ss = self_similar(Params::new(3, 0.1).with_a(1.0)).unwrap();
    assert!(matches!(hess_bound_lp(&ss, 1.0, 1e-3), Err(Error::Unsupported(_))));
    assert!(matches!(hess_bound_lp(&ubar(3), 3.0, 1e-3), Err(Error::Divergent(_))));
}

#[test]
fn hessian_bound_vanishing_depends_on_exponent() {
    let ts = log_grid(1e-30, 1e-300, 8).unwrap();
    let sub = norm_report(&ubar(7), &lp(NormKind::HessBoundLp, 2.0, 7), None, &ts);
    assert!(sub.strictly_decreasing(), "{:?}", sub.values);
    let sup: NormReport<f64> = norm_report(&ubar(3), &lp(NormKind::HessBoundLp, 1.0, 3), None, &default_t_grid());
    assert!(sup.strictly_increasing(), "{:?}", sup.values);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn self_similar_norm_scaling(log_t in -8.0..-1.0f64, p in 1.0..2.9f64, n in 3usize..5) {
        let s = self_similar(Params::new(n, 0.1).with_a(1.0)).unwrap();
        let t = 10f64.powf(log_t);
        let ratio = lp_norm(&s, p, 4.0 * t).unwrap().value / lp_norm(&s, p, t).unwrap().value;
        let expect = 2f64.powf((n as f64 - p) / p);
        prop_assert!((ratio - expect).abs() <= 1e-9 * expect, "ratio {} expect {}", ratio, expect);
    }

    #[test]
    fn norms_are_nonnegative(log_t in -8.0..-1.0f64, p in 1.0..4.0f64) {
        let v = lp_norm(&ubar(3), p, 10f64.powf(log_t)).unwrap();
        prop_assert!(v.value > 0.0 && v.quad_error >= 0.0);
    }
}
