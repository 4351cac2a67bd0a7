use cole_core::pdesolver::{
    convergence_study, march, min_principle_experiment, Advection, Bump, Initial, LeftBoundary, Scheme, SolverConfig,
};
use cole_core::solutions::{main_example, nonstationary_erf, self_similar, Params, SolutionFamily};
use cole_core::Error;

fn ubar() -> SolutionFamily<f64> {
    main_example(Params::new(3, 0.1).with_a(1.0)).unwrap()
}

fn base(r_max: f64) -> SolverConfig<f64> {
    SolverConfig::new(3, 0.1, r_max, 101, 1e-3, 2e-3).unwrap().with_advection(Advection::Central)
}

#[test]
fn central_scheme_converges_at_second_order() {
    for (family, r_max) in [(ubar(), 0.25), (nonstationary_erf(0.1).unwrap(), 0.5)] {
        let study = convergence_study(&base(r_max), &family, 3).unwrap();
        for ratio in &study.ratios {
            assert!((3.5..=4.5).contains(ratio), "{}: {:?}", family.label(), study.ratios);
        }
        assert!(study.orders.iter().all(|p| (p - 2.0).abs() <= 0.5));
    }
}

#[test]
fn upwind_scheme_converges_at_first_order() {
    let study = convergence_study(&base(0.25).with_advection(Advection::Upwind), &ubar(), 3).unwrap();
    for p in &study.orders {
        assert!((p - 1.0).abs() <= 0.3, "{:?}", study.orders);
    }
}

#[test]
fn singular_family_with_exact_inner_boundary() {
    let s = self_similar(Params::new(3, 0.1).with_a(1.0)).unwrap();
    let cfg = base(0.25).with_left(LeftBoundary::DirichletExact { r_min: 0.005 });
    let study = convergence_study(&cfg, &s, 3).unwrap();
    for ratio in &study.ratios {
        assert!((3.5..=4.5).contains(ratio), "{:?}", study.ratios);
    }
}

#[test]
fn schemes_agree_within_their_error_estimates() {
    let family = ubar();
    let run = |scheme, nr| {
        march(&base(0.25).with_scheme(scheme).with_nr(nr), Initial::Family(&family), Some(&family)).unwrap()
    };
    let (cn, cn_fine) = (run(Scheme::CrankNicolson, 201), run(Scheme::CrankNicolson, 401));
    let (rk, rk_fine) = (run(Scheme::Rk2, 201), run(Scheme::Rk2, 401));
    // Richardson estimate of the coarse error: 4/3 |u_h - u_{h/2}|
    let estimate = |c: &Vec<f64>, f: &Vec<f64>| {
        c.iter().enumerate().map(|(i, v)| (v - f[2 * i]).abs()).fold(0.0, f64::max) * 4.0 / 3.0
    };
    let gap = cn.u.iter().zip(&rk.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap <= estimate(&cn.u, &cn_fine.u) + estimate(&rk.u, &rk_fine.u));
}

#[test]
fn no_new_maximum() {
    let family = ubar();
    let cfg = base(0.25);
    let run = march(&cfg, Initial::Family(&family), Some(&family)).unwrap();
    let initial_max = cfg.radii().iter().map(|&r| family_u(&family, 1e-3, r)).fold(0.0, f64::max);
    let eps = initial_max * (cfg.h() / 0.02).powi(2);
    assert!(run.max_history.iter().all(|m| *m <= initial_max + eps));
    assert_eq!(run.max_history.len(), run.steps);
}

fn family_u(f: &SolutionFamily<f64>, t: f64, r: f64) -> f64 {
    use cole_core::solutions::RadialSolution;
    f.u(t, r).unwrap()
}

#[test]
fn zero_initial_data_is_a_fixed_point() {
    let cfg = base(1.0);
    let zero = vec![0.0; cfg.nr];
    for scheme in [Scheme::CrankNicolson, Scheme::Rk2] {
        let run = march(&cfg.with_scheme(scheme), Initial::Profile(&zero), None).unwrap();
        assert!(run.u.iter().all(|v| *v == 0.0));
        assert!(run.min_history.iter().chain(&run.max_history).all(|v| *v == 0.0));
    }
}

#[test]
fn minimum_of_a_down_bump_does_not_decrease() {
    let bump = Bump { depth: 1.0, center: 1.0, width: 0.2 };
    let slow = SolverConfig::new(3, 0.1, 2.0, 401, 1.0, 2.0).unwrap();
    let fast = SolverConfig::new(3, 10.0, 2.0, 401, 1.0, 2.0).unwrap();
    let a = min_principle_experiment(&slow, &bump).unwrap();
    let b = min_principle_experiment(&fast, &bump).unwrap();
    for rep in [&a, &b] {
        assert!(rep.non_decreasing, "decrease {} > {}", rep.max_decrease, rep.epsilon_h);
        assert!(rep.rate_at_minimum > 0.0);
        assert!(rep.max_overshoot <= rep.epsilon_h);
    }
    // more viscosity lifts the minimum faster
    let k = a.min_history.len() / 10;
    assert!(b.min_history[k] > a.min_history[k]);
    assert!(b.final_min > a.final_min);
}

#[test]
fn zero_bump_gives_zero_history() {
    let cfg = SolverConfig::new(3, 0.1, 2.0, 101, 1.0, 2.0).unwrap();
    let rep = min_principle_experiment(&cfg, &Bump { depth: 0.0, center: 1.0, width: 0.2 }).unwrap();
    assert!(rep.min_history.iter().all(|m| *m == 0.0));
}

#[test]
fn nan_data_aborts() {
    let cfg = base(1.0);
    let mut bad = vec![0.0; cfg.nr];
    bad[10] = f64::NAN;
    assert!(matches!(march(&cfg, Initial::Profile(&bad), None), Err(Error::Unstable(_))));
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(matches!(SolverConfig::new(3, 0.1, 1.0, 101, 0.0, 1.0), Err(Error::Config(_))));
    assert!(matches!(SolverConfig::new(3, -0.1, 1.0, 101, 1.0, 2.0), Err(Error::Config(_))));
    assert!(matches!(SolverConfig::new(3, 0.1, 1.0, 9000, 1.0, 2.0), Err(Error::Config(_))));
    let cfg = base(1.0).with_left(LeftBoundary::DirichletExact { r_min: 0.01 });
    let zero = vec![0.0; cfg.nr];
    assert!(matches!(march(&cfg, Initial::Profile(&zero), None), Err(Error::Config(_))));
}
