use cole_core::norms::{decay_fit, norm_report, NormKind, NormReport, NormSpec, PointFlag, NORM_REL_TOL};
use cole_core::pdesolver::{convergence_study, march, Advection, Initial, LeftBoundary, Scheme, SolverConfig};
use cole_core::residual::{
    divergence_form_residual, form_agreement, radial_residual, radial_residual_fd, Grid1D, ResidualReport,
};
use cole_core::solutions::{main_example, nonstationary_erf, self_similar, Params, RadialSolution, SolutionFamily};
use cole_verify as verify;
use serde_json::json;

use crate::config::Options;
use crate::output::{num, Document};
use crate::CliError;

const FIGURE_POINTS: usize = 200;
/// Stand-in for `t = 0`, where the figure 2 family is undefined.
pub const FIGURE_T_FLOOR: f64 = 1e-9;

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| if i + 1 == k { hi } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 }).collect()
}

fn params_line(p: &Params<f64>) -> String {
    format!("n={} mu={} a={} C={}", p.n, p.mu, p.a, p.c)
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn figure(which: u8, opts: &Options) -> Result<(), CliError> {
    let (family, t, r) = match which {
        1 => (main_example(Params::new(3, 0.1).with_a(1.0))?, (2e-5, 1e-3), (1e-4, 0.1)),
        2 => (self_similar(Params::new(3, 0.005).with_a(1.0))?, (0.0, 5e-5), (5e-5, 7e-4)),
        _ => (nonstationary_erf(0.01)?, (1e-3, 0.2), (1e-3, 0.3)),
    };
    let ts = linspace(t.0, t.1, FIGURE_POINTS);
    let rs = linspace(r.0, r.1, FIGURE_POINTS);
    let mut rows = Vec::with_capacity(FIGURE_POINTS * FIGURE_POINTS);
    let mut data = Vec::with_capacity(rows.capacity());
    for &t in &ts {
        let (te, flag) = if t > 0.0 { (t, "ok") } else { (FIGURE_T_FLOOR, "t_floor") };
        for &r in &rs {
            let u = family.u(te, r)?;
            rows.push(vec![num(te), num(r), num(u), flag.to_string()]);
            data.push(json!({ "t": te, "r": r, "u": u, "flag": flag }));
        }
    }
    Document::new("figure")
        .meta("figure", which)
        .meta("family", family.label())
        .meta("params", params_line(&family.params()))
        .meta("t_range", format!("{}:{}", t.0, t.1))
        .meta("r_range", format!("{}:{}", r.0, r.1))
        .meta("grid", format!("{FIGURE_POINTS}x{FIGURE_POINTS} uniform"))
        .meta("t_floor", format!("t = 0 evaluated at t = {FIGURE_T_FLOOR:e} and flagged t_floor"))
        .table(&["t", "r", "u", "flag"], rows)
        .payload(json!(data))
        .write(opts)
}

fn kind(opts: &Options) -> NormKind {
    opts.kind.unwrap_or(NormKind::Lp)
}

/// The family, the optional reference and one report per exponent.
type Sweep = (SolutionFamily<f64>, Option<SolutionFamily<f64>>, Vec<NormReport<f64>>);

fn sweep(opts: &Options) -> Result<Sweep, CliError> {
    let family = opts.family()?;
    let kind = kind(opts);
    let reference = if kind == NormKind::LpDistance { Some(opts.reference()?) } else { None };
    let ts = opts.times()?;
    let exponents = if kind == NormKind::Linf { vec![1.0] } else { opts.exponents()? };
    let reports = exponents
        .iter()
        .map(|&p| {
            let spec = NormSpec::new(kind, p, family.params().n)?;
            Ok(norm_report(&family, &spec, reference.as_ref(), &ts))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((family, reference, reports))
}

fn sweep_document(
    command: &str,
    opts: &Options,
    family: &SolutionFamily<f64>,
    reference: &Option<SolutionFamily<f64>>,
) -> Document {
    let ts = opts.times().unwrap_or_default();
    let mut d = Document::new(command)
        .meta("family", family.label())
        .meta("params", params_line(&family.params()))
        .meta("kind", kind(opts).name())
        .meta("quad_rel_tol", num(NORM_REL_TOL))
        .meta("t_grid", format!("{}:{}:{}", num(ts[0]), num(ts[ts.len() - 1]), ts.len()));
    if let Some(r) = reference {
        d = d.meta("reference", r.label());
    }
    d
}

/// Non-converged or failed points make the command exit with status 3 after
/// the report is written.
fn check_points(reports: &[NormReport<f64>]) -> Result<(), CliError> {
    let bad: usize = reports
        .iter()
        .flat_map(|r| &r.flags)
        .filter(|f| matches!(f, PointFlag::NonConverged | PointFlag::Failed))
        .count();
    if bad > 0 {
        return Err(CliError::Numeric(format!("{bad} grid point(s) did not converge")));
    }
    Ok(())
}

pub fn norms(opts: &Options) -> Result<(), CliError> {
    let (family, reference, reports) = sweep(opts)?;
    let linf = kind(opts) == NormKind::Linf;
    let mut header = vec!["t".to_string()];
    for rep in &reports {
        let tag = if linf { String::new() } else { format!("_p{}", rep.spec.p) };
        if linf {
            header.push("r".into());
        }
        header.extend(["value", "error_estimate", "flags"].iter().map(|h| format!("{h}{tag}")));
    }
    let rows = (0..reports[0].t.len())
        .map(|i| {
            let mut row = vec![num(reports[0].t[i])];
            for rep in &reports {
                if linf {
                    row.push(rep.argmax[i].map(num).unwrap_or_default());
                }
                row.extend([num(rep.values[i]), num(rep.quad_errors[i]), rep.flags[i].name().to_string()]);
            }
            row
        })
        .collect();
    let p_list: Vec<String> = reports.iter().map(|r| r.spec.p.to_string()).collect();
    sweep_document("norms", opts, &family, &reference)
        .meta("p", if linf { "inf".to_string() } else { p_list.join(",") })
        .meta("values", "norms (not p-th powers) over R^n")
        .header(header, rows)
        .payload(json!(reports))
        .write(opts)?;
    check_points(&reports)
}

pub fn decay(opts: &Options) -> Result<(), CliError> {
    let (family, reference, reports) = sweep(opts)?;
    let fits = reports.iter().map(decay_fit).collect::<Result<Vec<_>, _>>()?;
    let rows = reports
        .iter()
        .zip(&fits)
        .map(|(rep, f)| {
            vec![num(rep.spec.p), num(f.slope), num(f.intercept), num(f.max_log_residual), f.t.len().to_string()]
        })
        .collect();
    let data: Vec<_> = reports.iter().zip(&fits).map(|(rep, f)| json!({ "p": rep.spec.p, "fit": f })).collect();
    sweep_document("decay", opts, &family, &reference)
        .meta("fit", "least squares of ln value on ln t over converged points")
        .table(&["p", "slope", "intercept", "max_log_residual", "points"], rows)
        .payload(json!(data))
        .write(opts)?;
    check_points(&reports)
}

pub fn residual(opts: &Options) -> Result<(), CliError> {
    let family = opts.family()?;
    let tol = opts.tol.unwrap_or(verify::RESIDUAL_TOL);
    let grid = Grid1D::canonical(&family);
    let analytic = radial_residual(&family, &grid)?;
    let fd = radial_residual_fd(&family, &grid)?;
    let div = divergence_form_residual(&family, &grid)?;
    let agreement = form_agreement(&family, &grid)?;
    let row = |form: &str, r: &ResidualReport<f64>| {
        vec![
            form.to_string(),
            format!("{:?}", r.source).to_lowercase(),
            num(r.max_scaled_residual),
            num(r.max_abs_residual),
            num(r.l2_residual),
            num(r.worst.0),
            num(r.worst.1),
            r.points.to_string(),
        ]
    };
    let rows = vec![row("radial", &analytic), row("radial", &fd), row("divergence", &div)];
    Document::new("residual")
        .meta("family", family.label())
        .meta("params", params_line(&family.params()))
        .meta("grid", format!("r {}:{} nr {} {:?}{}, t {:?}", num(grid.r_min), num(grid.r_max), grid.nr, grid.spacing,
            if grid.diffusive { " (scaled by sqrt(4 mu t))" } else { "" }, grid.t))
        .meta("tol", num(tol))
        .meta("form_agreement", num(agreement))
        .table(
            &["form", "source", "max_scaled_residual", "max_abs_residual", "l2_residual", "worst_t", "worst_r", "points"],
            rows,
        )
        .payload(json!({ "grid": grid, "analytic": analytic, "finite_difference": fd, "divergence": div, "form_agreement": agreement, "tol": tol }))
        .write(opts)?;
    if analytic.max_scaled_residual > tol {
        return Err(CliError::Verify(format!("scaled residual {:e} exceeds {:e}", analytic.max_scaled_residual, tol)));
    }
    Ok(())
}

pub fn solve(opts: &Options) -> Result<(), CliError> {
    let family = opts.family()?;
    let n = family.params().n;
    let r_max = opts.r_max.unwrap_or(1.0);
    let mut cfg = SolverConfig::new(
        n,
        family.params().mu,
        r_max,
        opts.nr.unwrap_or(201),
        opts.t0.unwrap_or(1e-3),
        opts.t1.unwrap_or(2e-3),
    )?
    .with_scheme(opts.scheme.unwrap_or(Scheme::CrankNicolson))
    .with_advection(opts.advection.unwrap_or(Advection::Upwind))
    .with_cfl(opts.cfl.unwrap_or(0.5));
    if !family.origin_regular() {
        cfg = cfg.with_left(LeftBoundary::DirichletExact { r_min: opts.r_min.unwrap_or(0.01 * r_max) });
    }
    cfg.validate()?;
    let doc = Document::new("solve")
        .meta("family", family.label())
        .meta("params", params_line(&family.params()))
        .meta("scheme", format!("{:?}, advection {:?}, cfl {}", cfg.scheme, cfg.advection, cfg.cfl))
        .meta("grid", format!("r {}:{} nr {}", num(cfg.r_min()), num(cfg.r_max), cfg.nr))
        .meta("time", format!("{}:{}", num(cfg.t0), num(cfg.t1)));
    let levels = opts.levels.unwrap_or(1);
    if levels > 1 {
        let study = convergence_study(&cfg, &family, levels)?;
        let rows = (0..study.nr.len())
            .map(|i| {
                let (ratio, order) = if i == 0 {
                    (String::new(), String::new())
                } else {
                    (num(study.ratios[i - 1]), num(study.orders[i - 1]))
                };
                vec![study.nr[i].to_string(), num(study.h[i]), num(study.errors[i]), ratio, order]
            })
            .collect();
        return doc
            .table(&["nr", "h", "max_error", "ratio", "order"], rows)
            .payload(json!({ "config": cfg, "study": study }))
            .write(opts);
    }
    let run = march(&cfg, Initial::Family(&family), Some(&family))?;
    let exact: Vec<f64> = run.r.iter().map(|&r| family.u(run.t, r)).collect::<Result<_, _>>()?;
    let max_error = run.max_error(&family)?;
    let rows = run
        .r
        .iter()
        .zip(&run.u)
        .zip(&exact)
        .map(|((r, u), e)| vec![num(run.t), num(*r), num(*u), num(*e), num((u - e).abs())])
        .collect();
    doc.meta("steps", run.steps)
        .meta("dt", num(run.dt))
        .meta("max_error", num(max_error))
        .table(&["t", "r", "u", "exact", "error"], rows)
        .payload(json!({
            "config": cfg,
            "steps": run.steps,
            "dt": run.dt,
            "max_error": max_error,
            "r": run.r,
            "u": run.u,
            "exact": exact,
            "max_history": run.max_history,
            "min_history": run.min_history,
        }))
        .write(opts)
}

pub fn verify_all(opts: &Options) -> Result<(), CliError> {
    let results = verify::run_all();
    for r in &results {
        eprintln!("{}", r.line());
    }
    let rows = results
        .iter()
        .map(|r| {
            vec![
                r.id.to_string(),
                r.name.to_string(),
                if r.passed { "PASS" } else { "FAIL" }.into(),
                csv_quote(&r.detail),
            ]
        })
        .collect();
    Document::new("verify-all")
        .table(&["id", "criterion", "status", "detail"], rows)
        .payload(json!(results))
        .write(opts)?;
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(format!("criteria {} failed", failed.join(", "))))
    }
}
