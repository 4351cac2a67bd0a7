use cole_core::norms::lp_norm;
use cole_core::pdesolver::{march, Advection, Initial, SolverConfig};
use cole_core::residual::{radial_residual, Grid1D};
use cole_core::solutions::{main_example, RadialSolution};
use cole_core::{MainExample32, MainExample64, Params32, Params64};

#[test]
fn f32_agrees_with_f64() {
    let a = MainExample32::new(Params32::new(3, 0.1).with_a(1.0)).unwrap();
    let b = MainExample64::new(Params64::new(3, 0.1).with_a(1.0)).unwrap();
    for &(t, r) in &[(1e-3_f32, 0.01_f32), (1e-2, 0.1), (0.5, 1.0)] {
        let (x, y) = (a.u(t, r).unwrap() as f64, b.u(t as f64, r as f64).unwrap());
        assert!((x - y).abs() <= 1e-5 * y.abs(), "t={t} r={r}: {x} vs {y}");
    }
}

#[test]
fn f32_norm_residual_and_solver_run() {
    let s = main_example(Params32::new(3, 0.1).with_a(1.0)).unwrap();
    let l1 = lp_norm(&s, 1.0, 1e-3).unwrap().value as f64;
    let s64 = main_example(Params64::new(3, 0.1).with_a(1.0)).unwrap();
    let l1_64 = lp_norm(&s64, 1.0, 1e-3).unwrap().value;
    assert!((l1 - l1_64).abs() <= 1e-4 * l1_64);

    let rep = radial_residual(&s, &Grid1D::canonical(&s)).unwrap();
    assert!(rep.max_scaled_residual <= 1e-4);

    let cfg = SolverConfig::new(3, 0.1_f32, 0.25, 101, 1e-3, 2e-3).unwrap().with_advection(Advection::Central);
    let run = march(&cfg, Initial::Family(&s), Some(&s)).unwrap();
    assert!(run.max_error(&s).unwrap() < 1.0);
}
