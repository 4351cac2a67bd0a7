//! Pointwise residuals of the radial and Cartesian forms of the equation,
//! and the limits that make the main example a classical solution at the
//! origin.
//!
//! Residuals are scaled by the largest individual term at each point, so a
//! value of `1e-12` means the terms cancel to twelve digits whatever their
//! size.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::solutions::{cartesian_components, cartesian_time_derivative, RadialJet, RadialSolution, SolutionFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    Log,
}

/// Radii and sample times. With `diffusive` set, `r_min` and `r_max` are in
/// units of `sqrt(4 mu t)` and the radii move with each sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D<T> {
    pub r_min: T,
    pub r_max: T,
    pub nr: usize,
    pub spacing: Spacing,
    pub diffusive: bool,
    pub t: Vec<T>,
}

impl<T: Real> Grid1D<T> {
    pub fn new(r_min: T, r_max: T, nr: usize, spacing: Spacing, t: Vec<T>) -> Result<Self> {
        if !(r_min > T::zero() && r_max > r_min && r_max.is_finite()) {
            return Err(domain!("grid needs 0 < r_min < r_max, got [{r_min:e}, {r_max:e}]"));
        }
        if nr < 16 {
            return Err(domain!("grid needs at least 16 radii, got {nr}"));
        }
        if t.is_empty() || t.iter().any(|t| !(*t > T::zero() && t.is_finite())) {
            return Err(domain!("grid needs at least one positive sample time"));
        }
        Ok(Self { r_min, r_max, nr, spacing, diffusive: false, t })
    }

    /// Interprets the radial range in units of `sqrt(4 mu t)`.
    pub fn diffusive(mut self) -> Self {
        self.diffusive = true;
        self
    }

    /// Same ranges with `2 nr - 1` points, so every old point is kept.
    pub fn refined(&self) -> Self {
        Self { nr: 2 * self.nr - 1, ..self.clone() }
    }

    fn unit_radii(&self) -> Vec<T> {
        let last = T::of_usize(self.nr - 1);
        (0..self.nr)
            .map(|i| {
                let s = T::of_usize(i) / last;
                match self.spacing {
                    Spacing::Uniform => self.r_min + (self.r_max - self.r_min) * s,
                    Spacing::Log => (self.r_min.ln() + (self.r_max / self.r_min).ln() * s).exp(),
                }
            })
            .collect()
    }

    /// The radii used at time `t`.
    pub fn radii_at(&self, t: T, mu: T) -> Vec<T> {
        let scale = if self.diffusive { (T::lit(4.0) * mu * t).sqrt() } else { T::one() };
        self.unit_radii().into_iter().map(|r| r * scale).collect()
    }

    /// The grid each family is checked on: the first figure's window for the
    /// main example, a diffusive window for the time-dependent families and
    /// a window clear of any pole for the stationary ones. Families singular
    /// at the origin start at `1e-3 sqrt(4 mu t)`.
    pub fn canonical(s: &SolutionFamily<T>) -> Self {
        let lit = T::lit;
        let times = |lo: f64, hi: f64, k: usize| -> Vec<T> {
            (0..k).map(|i| lit(lo * (hi / lo).powf(i as f64 / (k - 1) as f64))).collect()
        };
        let grid = |lo: f64, hi: f64, t: Vec<T>| Grid1D::new(lit(lo), lit(hi), 64, Spacing::Log, t).expect("valid");
        match s {
            SolutionFamily::MainExample(_) => grid(1e-4, 0.1, times(2e-5, 1e-3, 6)),
            SolutionFamily::SelfSimilar(_) => grid(1e-3, 10.0, times(1e-6, 1e-2, 5)).diffusive(),
            SolutionFamily::NonStationaryErf(_) => grid(1e-3, 10.0, times(1e-4, 1.0, 5)).diffusive(),
            SolutionFamily::ColeHopf(_) => grid(1e-3, 10.0, times(1e-4, 1e-1, 4)).diffusive(),
            SolutionFamily::Stationary(st) => {
                let (lo, hi) = match st.pole() {
                    Some(p) => {
                        let p = p.as_f64();
                        if p > 2e-3 {
                            (1e-3 * p, 0.5 * p)
                        } else {
                            (2.0 * p, 2e4 * p)
                        }
                    }
                    None => (1e-3, 10.0),
                };
                grid(lo, hi, vec![T::one()])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

/// Summary of residuals over a grid or point set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    /// Largest residual relative to the largest term at its point.
    pub max_scaled_residual: T,
    /// Largest unscaled residual.
    pub max_abs_residual: T,
    /// Root mean square of the scaled residuals.
    pub l2_residual: T,
    /// `(t, r)` of the largest scaled residual.
    pub worst: (T, T),
    pub points: usize,
    pub source: DerivativeSource,
}

#[derive(Debug, Clone, Copy)]
struct PointResidual<T> {
    t: T,
    r: T,
    abs: T,
    scaled: T,
}

fn summarize<T: Real>(points: &[PointResidual<T>], source: DerivativeSource) -> ResidualReport<T> {
    let mut worst = (T::zero(), T::zero());
    let mut max_scaled = T::zero();
    let mut max_abs = T::zero();
    let mut sum_sq = T::zero();
    for p in points {
        if p.scaled > max_scaled || !p.scaled.is_finite() {
            max_scaled = p.scaled;
            worst = (p.t, p.r);
        }
        max_abs = max_abs.max(p.abs);
        sum_sq = sum_sq + p.scaled * p.scaled;
    }
    let l2 = if points.is_empty() { T::zero() } else { (sum_sq / T::of_usize(points.len())).sqrt() };
    ResidualReport {
        max_scaled_residual: max_scaled,
        max_abs_residual: max_abs,
        l2_residual: l2,
        worst,
        points: points.len(),
        source,
    }
}

/// `|residual| / max |term|`. Points whose terms have all underflowed
/// below the normal range carry no relative information and count as zero.
fn relative<T: Real>(residual: T, terms: &[T]) -> T {
    let scale = terms.iter().fold(T::zero(), |m, t| m.max(t.abs()));
    if scale < T::min_positive_value() / T::epsilon() {
        T::zero()
    } else {
        residual.abs() / scale
    }
}

/// Residual of `u_t + u u_r = mu (u_rr + (n-1)(u_r/r - u/r^2))` and its terms.
///
/// For families regular at the origin `u_r/r - u/r^2` is taken from the
/// quotients (`r (v_r/r)`) to avoid cancellation.
fn radial_terms<T: Real, S: RadialSolution<T> + ?Sized>(s: &S, t: T, r: T, j: &RadialJet<T>) -> Result<(T, [T; 4])> {
    let p = s.params();
    let m = T::of_usize(p.n - 1);
    let curvature = if s.origin_regular() { r * s.quotients(t, r)?.v_r_over_r } else { j.u_r / r - j.u / (r * r) };
    let terms = [j.u_t, j.u * j.u_r, -p.mu * j.u_rr, -p.mu * m * curvature];
    Ok((terms.iter().copied().sum(), terms))
}

/// Residual of the divergence form
/// `u_t + (u^2/2)_r = mu (u_r + (n-1) u/r)_r`, with the diffusive flux
/// derivative `u_rr + (n-1) (u/r)_r` and `(u/r)_r = r (v_r / r)`.
fn divergence_terms<T: Real, S: RadialSolution<T> + ?Sized>(
    s: &S,
    t: T,
    r: T,
    j: &RadialJet<T>,
) -> Result<(T, [T; 4])> {
    let p = s.params();
    let m = T::of_usize(p.n - 1);
    let q = s.quotients(t, r)?;
    let curvature = m * r * q.v_r_over_r;
    let flux_r = j.u_rr + curvature;
    let advective = j.u * j.u_r;
    let residual = j.u_t + advective - p.mu * flux_r;
    // scaled by the expanded terms so a vanishing flux derivative does not
    // inflate the relative residual
    Ok((residual, [j.u_t, advective, -p.mu * j.u_rr, -p.mu * curvature]))
}

/// Length over which the profile changes by O(1) near `r`: `r` itself,
/// `4 mu t / r` in a Gaussian tail, and the distance to a pole.
fn resolution_length<T: Real>(s: &SolutionFamily<T>, t: T, r: T) -> T {
    match s {
        SolutionFamily::Stationary(st) => st.pole().map_or(r, |p| r.min((r - p).abs())),
        _ => {
            let w2 = T::lit(4.0) * s.params().mu * t;
            r.min(w2 / r)
        }
    }
}

fn grid_points<T: Real>(s: &SolutionFamily<T>, g: &Grid1D<T>) -> Result<Vec<(T, T, T)>> {
    let mu = s.params().mu;
    let mut out = Vec::with_capacity(g.t.len() * g.nr);
    for &t in &g.t {
        let radii = g.radii_at(t, mu);
        for (i, &r) in radii.iter().enumerate() {
            if !s.origin_regular() && !(r > T::zero()) {
                return Err(Error::Singular(format!("grid includes r = {r:e} for a family singular at the origin")));
            }
            // finite-difference step: the local spacing, shrunk where the
            // profile varies faster than the grid resolves
            let spacing = if i + 1 < radii.len() { radii[i + 1] - r } else { r - radii[i - 1] };
            let h = spacing * (resolution_length(s, t, r) / r).min(T::one());
            out.push((t, r, h));
        }
    }
    Ok(out)
}

fn collect<T: Real>(pts: &[(T, T, T)], f: impl Fn(T, T, T) -> Result<(T, T)> + Sync) -> Result<Vec<PointResidual<T>>> {
    pts.par_iter()
        .map(|&(t, r, h)| {
            let (res, rel) = f(t, r, h)?;
            Ok(PointResidual { t, r, abs: res.abs(), scaled: rel })
        })
        .collect()
}

/// Radial residual with analytic derivatives over the grid.
pub fn radial_residual<T: Real>(s: &SolutionFamily<T>, g: &Grid1D<T>) -> Result<ResidualReport<T>> {
    let pts = grid_points(s, g)?;
    let res = collect(&pts, |t, r, _| {
        let j = s.jet(t, r)?;
        let (res, terms) = radial_terms(s, t, r, &j)?;
        Ok((res, relative(res, &terms)))
    })?;
    Ok(summarize(&res, DerivativeSource::Analytic))
}

/// Five-point central differences of `u` in `r` and `t` with steps tied to
/// the step `h` derived from the grid: `h_r = min(h, r/4)`, `h_t = t h_r / (2r)`.
pub fn fd_jet<T: Real, S: RadialSolution<T> + ?Sized>(s: &S, t: T, r: T, h: T) -> Result<RadialJet<T>> {
    let hr = h.min(r / T::lit(4.0));
    let ht = t * hr / (T::lit(2.0) * r);
    let (eight, twelve) = (T::lit(8.0), T::lit(12.0));
    let u = s.u(t, r)?;
    let (um2, um1, up1, up2) = (s.u(t, r - hr - hr)?, s.u(t, r - hr)?, s.u(t, r + hr)?, s.u(t, r + hr + hr)?);
    let u_r = (um2 - eight * um1 + eight * up1 - up2) / (twelve * hr);
    let u_rr = (-um2 + T::lit(16.0) * um1 - T::lit(30.0) * u + T::lit(16.0) * up1 - up2) / (twelve * hr * hr);
    let (tm2, tm1, tp1, tp2) = (s.u(t - ht - ht, r)?, s.u(t - ht, r)?, s.u(t + ht, r)?, s.u(t + ht + ht, r)?);
    let u_t = (tm2 - eight * tm1 + eight * tp1 - tp2) / (twelve * ht);
    Ok(RadialJet { u, u_r, u_rr, u_t })
}

/// Radial residual with finite-difference derivatives (see [`fd_jet`]);
/// `u_r/r - u/r^2` is formed from the differenced jet directly.
pub fn radial_residual_fd<T: Real>(s: &SolutionFamily<T>, g: &Grid1D<T>) -> Result<ResidualReport<T>> {
    let pts = grid_points(s, g)?;
    let p = s.params();
    let m = T::of_usize(p.n - 1);
    let res = collect(&pts, |t, r, h| {
        let j = fd_jet(s, t, r, h)?;
        let terms = [j.u_t, j.u * j.u_r, -p.mu * j.u_rr, -p.mu * m * (j.u_r / r - j.u / (r * r))];
        let res: T = terms.iter().copied().sum();
        Ok((res, relative(res, &terms)))
    })?;
    Ok(summarize(&res, DerivativeSource::FiniteDifference))
}

/// Largest scaled gap between the finite-difference and analytic residuals.
pub fn fd_residual_gap<T: Real>(s: &SolutionFamily<T>, g: &Grid1D<T>) -> Result<T> {
    let pts = grid_points(s, g)?;
    let p = s.params();
    let m = T::of_usize(p.n - 1);
    let gaps = collect(&pts, |t, r, h| {
        let a = s.jet(t, r)?;
        let (ra, terms) = radial_terms(s, t, r, &a)?;
        let f = fd_jet(s, t, r, h)?;
        let rf = f.u_t + f.u * f.u_r - p.mu * (f.u_rr + m * (f.u_r / r - f.u / (r * r)));
        Ok((rf - ra, relative(rf - ra, &terms)))
    })?;
    Ok(gaps.iter().fold(T::zero(), |m, p| m.max(p.scaled)))
}

/// Residual of the divergence form with analytic derivatives.
pub fn divergence_form_residual<T: Real>(s: &SolutionFamily<T>, g: &Grid1D<T>) -> Result<ResidualReport<T>> {
    let pts = grid_points(s, g)?;
    let res = collect(&pts, |t, r, _| {
        let j = s.jet(t, r)?;
        let (res, terms) = divergence_terms(s, t, r, &j)?;
        Ok((res, relative(res, &terms)))
    })?;
    Ok(summarize(&res, DerivativeSource::Analytic))
}

/// Largest `|R_div - R_radial|` over the grid, relative to the largest term.
pub fn form_agreement<T: Real>(s: &SolutionFamily<T>, g: &Grid1D<T>) -> Result<T> {
    let pts = grid_points(s, g)?;
    let gaps = collect(&pts, |t, r, _| {
        let j = s.jet(t, r)?;
        let (a, terms) = radial_terms(s, t, r, &j)?;
        let (b, _) = divergence_terms(s, t, r, &j)?;
        Ok((a - b, relative(a - b, &terms)))
    })?;
    Ok(gaps.iter().fold(T::zero(), |m, p| m.max(p.scaled)))
}

/// Residual of `u_t + (u . grad) u - mu Lap u` at Cartesian points, from the
/// assembled Jacobian and second partials. The origin is allowed for
/// families regular there.
pub fn cartesian_residual<T: Real>(s: &SolutionFamily<T>, t: T, points: &[Vec<T>]) -> Result<ResidualReport<T>> {
    let mu = s.params().mu;
    let res: Vec<PointResidual<T>> = points
        .par_iter()
        .map(|x| {
            let c = cartesian_components(s, t, x)?;
            let ut = cartesian_time_derivative(s, t, x)?;
            let n = x.len();
            let r = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
            let mut worst_abs = T::zero();
            let mut worst_scaled = T::zero();
            for (i, ut_i) in ut.iter().enumerate() {
                let adv: T = (0..n).map(|j| c.value[j] * c.jacobian[i][j]).sum();
                let lap: T = (0..n).map(|j| c.second_partials[i][j][j]).sum();
                let terms = [*ut_i, adv, -mu * lap];
                let res: T = terms.iter().copied().sum();
                worst_abs = worst_abs.max(res.abs());
                worst_scaled = worst_scaled.max(relative(res, &terms));
            }
            Ok(PointResidual { t, r, abs: worst_abs, scaled: worst_scaled })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&res, DerivativeSource::Analytic))
}

/// One limit checked by [`origin_limit_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCheck<T> {
    pub name: String,
    pub limit: T,
    /// Distances to the limit at each radius.
    pub errors: Vec<T>,
    pub expected_order: T,
    pub observed_order: T,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OriginReport<T> {
    pub t_bar: T,
    pub radii: Vec<T>,
    /// The Jacobian at `x = 0` is `slope * I`.
    pub jacobian_slope: T,
    /// `1 / (t (1 + A))`.
    pub expected_slope: T,
    pub slope_relative_error: T,
    pub checks: Vec<LimitCheck<T>>,
}

impl<T: Real> OriginReport<T> {
    pub fn passed(&self, slope_tol: T) -> bool {
        self.slope_relative_error <= slope_tol && self.checks.iter().all(|c| c.within_tolerance)
    }
}

/// Tolerance on observed convergence orders.
pub const ORDER_TOLERANCE: f64 = 0.2;

/// Default radii `2^{-k} sqrt(4 mu t)` for `k = 4..=14`.
pub fn default_origin_radii<T: Real>(mu: T, t_bar: T) -> Vec<T> {
    let w = (T::lit(4.0) * mu * t_bar).sqrt();
    (4..=14).map(|k| w * T::lit(2f64.powi(-k))).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope<T: Real>(x: &[T], y: &[T]) -> T {
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let m = T::of_usize(lx.len());
    let xb = lx.iter().copied().sum::<T>() / m;
    let yb = ly.iter().copied().sum::<T>() / m;
    let sxy = lx.iter().zip(&ly).map(|(a, b)| (*a - xb) * (*b - yb)).sum::<T>();
    let sxx = lx.iter().map(|a| (*a - xb) * (*a - xb)).sum::<T>();
    sxy / sxx
}

/// Checks that `u/r -> 1/(t (1+A))` at order `r^2`, that `(u/r)_r -> 0` at
/// order `r`, and that `(1/r)((u/r)_r / r)_r -> A (A - 1) / (4 mu^2 t^3 (1+A)^3)`
/// at order `r^2`, with `A = a (4 pi mu t)^{n/2}`.
pub fn origin_limit_check<T: Real>(s: &SolutionFamily<T>, t_bar: T, radii: &[T]) -> Result<OriginReport<T>> {
    if !matches!(s, SolutionFamily::MainExample(_)) {
        return Err(Error::Unsupported("origin limits are stated for the main example only".into()));
    }
    if !(t_bar > T::zero()) {
        return Err(domain!("t_bar must be positive"));
    }
    if radii.len() < 3 || radii.windows(2).any(|w| !(w[1] < w[0])) || radii.iter().any(|r| !(*r > T::zero())) {
        return Err(domain!("radii must be positive, strictly decreasing and at least three"));
    }
    let p = s.params();
    let one = T::one();
    let big_a = p.a * (T::lit(4.0) * T::PI() * p.mu * t_bar).powf(T::of_usize(p.n) / T::lit(2.0));
    let limit_v = one / (t_bar * (one + big_a));
    let limit_third = big_a * (big_a - one) / (T::lit(4.0) * p.mu * p.mu * t_bar.powi(3) * (one + big_a).powi(3));

    let mut ev = Vec::new();
    let mut evr = Vec::new();
    let mut ethird = Vec::new();
    for &r in radii {
        let q = s.quotients(t_bar, r)?;
        ev.push((q.v - limit_v).abs());
        evr.push((r * q.v_r_over_r).abs());
        ethird.push((q.third - limit_third).abs());
    }
    let tol = T::lit(ORDER_TOLERANCE);
    let check = |name: &str, limit: T, errors: Vec<T>, expected: T| {
        let observed = log_log_slope(radii, &errors);
        LimitCheck {
            name: name.to_string(),
            limit,
            within_tolerance: (observed - expected).abs() <= tol,
            errors,
            expected_order: expected,
            observed_order: observed,
        }
    };
    let two = T::lit(2.0);
    let origin = vec![T::zero(); p.n];
    let slope = cartesian_components(s, t_bar, &origin)?.jacobian[0][0];
    Ok(OriginReport {
        t_bar,
        radii: radii.to_vec(),
        jacobian_slope: slope,
        expected_slope: limit_v,
        slope_relative_error: ((slope - limit_v) / limit_v).abs(),
        checks: vec![
            check("u/r", limit_v, ev, two),
            check("(u/r)_r", T::zero(), evr, one),
            check("(1/r)((u/r)_r/r)_r", limit_third, ethird, two),
        ],
    })
}
