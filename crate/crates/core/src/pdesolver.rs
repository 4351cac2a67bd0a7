//! Finite-difference solver for the radial equation on a uniform grid,
//! used to check the closed forms independently, plus the minimum-principle
//! experiment for a negative bump.
//!
//! The default scheme treats diffusion (including the `-(n-1) u / r^2`
//! term) with Crank-Nicolson and advection explicitly with second-order
//! Adams-Bashforth; the alternative is Heun's method for everything.
//! Advection uses first-order upwind or second-order central differences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::solutions::{RadialSolution, SolutionFamily};

/// Largest grid accepted by [`SolverConfig::validate`].
pub const MAX_POINTS: usize = 8192;
const MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Crank-Nicolson diffusion with explicit Adams-Bashforth advection.
    CrankNicolson,
    /// Heun's method (explicit RK2) for all terms.
    Rk2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Advection {
    Upwind,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftBoundary {
    /// `u(t, 0) = 0`, for profiles regular at the origin.
    DirichletZero,
    /// Exact values at `r_min > 0` from the boundary family.
    DirichletExact { r_min: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    pub n: usize,
    pub mu: T,
    pub r_max: T,
    /// Grid points including both boundaries.
    pub nr: usize,
    pub t0: T,
    pub t1: T,
    /// Safety factor on the advective (and, for RK2, diffusive) step limit.
    pub cfl: T,
    pub scheme: Scheme,
    pub advection: Advection,
    pub left: LeftBoundary,
}

impl<T: Real> SolverConfig<T> {
    /// Crank-Nicolson with upwind advection, zero at the origin, `cfl = 0.5`.
    pub fn new(n: usize, mu: T, r_max: T, nr: usize, t0: T, t1: T) -> Result<Self> {
        let cfg = Self {
            n,
            mu,
            r_max,
            nr,
            t0,
            t1,
            cfl: T::lit(0.5),
            scheme: Scheme::CrankNicolson,
            advection: Advection::Upwind,
            left: LeftBoundary::DirichletZero,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_advection(mut self, advection: Advection) -> Self {
        self.advection = advection;
        self
    }

    pub fn with_left(mut self, left: LeftBoundary) -> Self {
        self.left = left;
        self
    }

    pub fn with_cfl(mut self, cfl: T) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_nr(mut self, nr: usize) -> Self {
        self.nr = nr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if !(self.mu > T::zero() && self.mu.is_finite()) {
            return Err(Error::Config(format!("viscosity must be positive, got {}", self.mu)));
        }
        if !(self.t1 > self.t0 && self.t0 > T::zero() && self.t1.is_finite()) {
            return Err(Error::Config(format!("need t1 > t0 > 0, got t0 = {}, t1 = {}", self.t0, self.t1)));
        }
        if !(8..=MAX_POINTS).contains(&self.nr) {
            return Err(Error::Config(format!("nr must be in 8..={MAX_POINTS}, got {}", self.nr)));
        }
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(Error::Config(format!("CFL safety factor must be in (0, 1], got {}", self.cfl)));
        }
        if !(self.r_max > self.r_min() && self.r_max.is_finite()) {
            return Err(Error::Config("r_max must exceed the left boundary".into()));
        }
        if let LeftBoundary::DirichletExact { r_min } = self.left {
            if !(r_min > 0.0) {
                return Err(Error::Config("exact left boundary needs r_min > 0".into()));
            }
        }
        Ok(())
    }

    pub fn r_min(&self) -> T {
        match self.left {
            LeftBoundary::DirichletZero => T::zero(),
            LeftBoundary::DirichletExact { r_min } => T::lit(r_min),
        }
    }

    pub fn h(&self) -> T {
        (self.r_max - self.r_min()) / T::of_usize(self.nr - 1)
    }

    pub fn radii(&self) -> Vec<T> {
        let (a, h) = (self.r_min(), self.h());
        (0..self.nr).map(|i| if i == self.nr - 1 { self.r_max } else { a + h * T::of_usize(i) }).collect()
    }
}

/// Initial data for [`march`].
#[derive(Debug, Clone, Copy)]
pub enum Initial<'a, T: Real> {
    /// Samples of a family at `t0`.
    Family(&'a SolutionFamily<T>),
    /// Values on the solver grid.
    Profile(&'a [T]),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverRun<T> {
    pub r: Vec<T>,
    pub u: Vec<T>,
    pub t: T,
    pub dt: T,
    pub steps: usize,
    /// Profile maximum after each step.
    pub max_history: Vec<T>,
    /// Profile minimum after each step.
    pub min_history: Vec<T>,
}

impl<T: Real> SolverRun<T> {
    /// Largest pointwise difference from a family at the final time.
    pub fn max_error(&self, exact: &SolutionFamily<T>) -> Result<T> {
        let mut worst = T::zero();
        for (&r, &u) in self.r.iter().zip(&self.u) {
            worst = worst.max((u - exact.u(self.t, r)?).abs());
        }
        Ok(worst)
    }
}

struct Stepper<'a, T: Real> {
    cfg: &'a SolverConfig<T>,
    r: Vec<T>,
    h: T,
    boundary: Option<&'a SolutionFamily<T>>,
    /// Diffusion operator rows `(lower, diag, upper)` at interior points.
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
}

impl<'a, T: Real> Stepper<'a, T> {
    fn new(cfg: &'a SolverConfig<T>, boundary: Option<&'a SolutionFamily<T>>) -> Self {
        let r = cfg.radii();
        let h = cfg.h();
        let m = T::of_usize(cfg.n - 1);
        let two = T::lit(2.0);
        let (mut lower, mut diag, mut upper) = (Vec::new(), Vec::new(), Vec::new());
        for &ri in &r[1..cfg.nr - 1] {
            let first = m / (two * h * ri);
            lower.push(cfg.mu * (T::one() / (h * h) - first));
            diag.push(cfg.mu * (-two / (h * h) - m / (ri * ri)));
            upper.push(cfg.mu * (T::one() / (h * h) + first));
        }
        Self { cfg, r, h, boundary, lower, diag, upper }
    }

    fn boundary_values(&self, t: T) -> Result<(T, T)> {
        let left = match (self.cfg.left, self.boundary) {
            (LeftBoundary::DirichletZero, _) => T::zero(),
            (LeftBoundary::DirichletExact { .. }, Some(b)) => b.u(t, self.r[0])?,
            (LeftBoundary::DirichletExact { .. }, None) => {
                return Err(Error::Config("exact left boundary needs a boundary family".into()))
            }
        };
        let right = match self.boundary {
            Some(b) => b.u(t, self.cfg.r_max)?,
            None => T::zero(),
        };
        Ok((left, right))
    }

    /// `L u` at interior points.
    fn diffusion(&self, u: &[T]) -> Vec<T> {
        (0..self.diag.len())
            .map(|k| self.lower[k] * u[k] + self.diag[k] * u[k + 1] + self.upper[k] * u[k + 2])
            .collect()
    }

    /// `u u_r` at interior points.
    fn advection(&self, u: &[T]) -> Vec<T> {
        let h = self.h;
        (1..u.len() - 1)
            .map(|i| match self.cfg.advection {
                Advection::Central => u[i] * (u[i + 1] - u[i - 1]) / (h + h),
                Advection::Upwind => {
                    if u[i] > T::zero() {
                        u[i] * (u[i] - u[i - 1]) / h
                    } else {
                        u[i] * (u[i + 1] - u[i]) / h
                    }
                }
            })
            .collect()
    }

    /// Right-hand side `L u - u u_r` at interior points.
    fn rhs(&self, u: &[T]) -> Vec<T> {
        self.diffusion(u).into_iter().zip(self.advection(u)).map(|(d, a)| d - a).collect()
    }

    /// Solves `(I - dt/2 L) x = rhs` on the interior with known boundary values.
    fn implicit_solve(&self, dt: T, mut rhs: Vec<T>, left: T, right: T) -> Vec<T> {
        let half = dt / T::lit(2.0);
        let m = rhs.len();
        rhs[0] = rhs[0] + half * self.lower[0] * left;
        rhs[m - 1] = rhs[m - 1] + half * self.upper[m - 1] * right;
        let a: Vec<T> = self.lower.iter().map(|&l| -half * l).collect();
        let b: Vec<T> = self.diag.iter().map(|&d| T::one() - half * d).collect();
        let c: Vec<T> = self.upper.iter().map(|&u| -half * u).collect();
        thomas(&a, &b, &c, &mut rhs);
        rhs
    }
}

/// Solves a tridiagonal system in place (`a[0]` and `c[m-1]` are ignored).
fn thomas<T: Real>(a: &[T], b: &[T], c: &[T], d: &mut [T]) {
    let m = d.len();
    let mut cp = vec![T::zero(); m];
    let mut beta = b[0];
    cp[0] = c[0] / beta;
    d[0] = d[0] / beta;
    for i in 1..m {
        beta = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / beta;
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..m - 1).rev() {
        d[i] = d[i] - cp[i] * d[i + 1];
    }
}

fn check_finite<T: Real>(u: &[T], step: usize, t: T) -> Result<()> {
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::Unstable(format!("non-finite value at grid index {i} after step {step} (t = {t:e})")));
    }
    Ok(())
}

fn extrema<T: Real>(u: &[T]) -> (T, T) {
    u.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Marches from `t0` to `t1`. The right boundary (and an exact left
/// boundary) take values from `boundary`; without one they are zero.
///
/// The step is fixed for the run at `cfl h / V` with
/// `V = max(max|u|, (r_max - r_min) / (t1 - t0))` taken over the initial
/// and boundary data, so it always shrinks with `h`; RK2 is further limited
/// by `cfl h^2 / (mu (n+1))`. A run whose Courant number later exceeds one
/// is aborted.
pub fn march<T: Real>(
    cfg: &SolverConfig<T>,
    initial: Initial<'_, T>,
    boundary: Option<&SolutionFamily<T>>,
) -> Result<SolverRun<T>> {
    cfg.validate()?;
    let st = Stepper::new(cfg, boundary);
    let mut u: Vec<T> = match initial {
        Initial::Family(f) => st.r.iter().map(|&r| f.u(cfg.t0, r)).collect::<Result<_>>()?,
        Initial::Profile(p) => {
            if p.len() != cfg.nr {
                return Err(domain!("initial profile has {} values, grid has {}", p.len(), cfg.nr));
            }
            p.to_vec()
        }
    };
    check_finite(&u, 0, cfg.t0)?;
    let (l0, r0) = st.boundary_values(cfg.t0)?;
    u[0] = l0;
    u[cfg.nr - 1] = r0;

    let h = st.h;
    let (lo, hi) = extrema(&u);
    let (l1, r1) = st.boundary_values(cfg.t1)?;
    let speed = [lo.abs(), hi.abs(), l1.abs(), r1.abs()].into_iter().fold(T::zero(), T::max);
    let span = cfg.t1 - cfg.t0;
    let speed = speed.max((cfg.r_max - cfg.r_min()) / span);
    let mut dt_max = cfg.cfl * h / speed;
    if cfg.scheme == Scheme::Rk2 {
        dt_max = dt_max.min(cfg.cfl * h * h / (cfg.mu * T::of_usize(cfg.n + 1)));
    }
    let steps_f = (span / dt_max).ceil();
    if !(steps_f <= T::of_usize(MAX_STEPS)) {
        return Err(Error::Config(format!("run would need {} steps (limit {MAX_STEPS})", steps_f)));
    }
    let steps = steps_f.to_usize().unwrap_or(1).max(1);
    let dt = span / T::of_usize(steps);

    let mut max_history = Vec::with_capacity(steps);
    let mut min_history = Vec::with_capacity(steps);
    let mut prev_adv: Option<Vec<T>> = None;
    let (three_half, half) = (T::lit(1.5), T::lit(0.5));
    let mut t = cfg.t0;
    for step in 1..=steps {
        let t_next = if step == steps { cfg.t1 } else { cfg.t0 + dt * T::of_usize(step) };
        let (left_next, right_next) = st.boundary_values(t_next)?;
        let interior = match cfg.scheme {
            Scheme::CrankNicolson => {
                let diff = st.diffusion(&u);
                let adv = st.advection(&u);
                let explicit: Vec<T> = match &prev_adv {
                    Some(old) => adv.iter().zip(old).map(|(a, o)| three_half * *a - half * *o).collect(),
                    None => adv.clone(),
                };
                let rhs: Vec<T> = (0..diff.len()).map(|k| u[k + 1] + half * dt * diff[k] - dt * explicit[k]).collect();
                prev_adv = Some(adv);
                st.implicit_solve(dt, rhs, left_next, right_next)
            }
            Scheme::Rk2 => {
                let k1 = st.rhs(&u);
                let mut stage = u.clone();
                for (k, v) in k1.iter().enumerate() {
                    stage[k + 1] = u[k + 1] + dt * *v;
                }
                stage[0] = left_next;
                stage[cfg.nr - 1] = right_next;
                let k2 = st.rhs(&stage);
                (0..k1.len()).map(|k| u[k + 1] + half * dt * (k1[k] + k2[k])).collect()
            }
        };
        u[1..cfg.nr - 1].copy_from_slice(&interior);
        u[0] = left_next;
        u[cfg.nr - 1] = right_next;
        t = t_next;
        check_finite(&u, step, t)?;
        let (lo, hi) = extrema(&u);
        let courant = lo.abs().max(hi.abs()) * dt / h;
        if courant > T::one() {
            return Err(Error::Unstable(format!(
                "Courant number {courant:.3} exceeds 1 after step {step} (t = {t:e}); amplitude grew"
            )));
        }
        min_history.push(lo);
        max_history.push(hi);
    }
    Ok(SolverRun { r: st.r, u, t, dt, steps, max_history, min_history })
}

/// Errors against the exact family under repeated halving of `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy<T> {
    pub nr: Vec<usize>,
    pub h: Vec<T>,
    pub errors: Vec<T>,
    /// `errors[k] / errors[k+1]`.
    pub ratios: Vec<T>,
    /// `log2` of the ratios.
    pub orders: Vec<T>,
}

/// Runs `levels` grids, each halving the spacing of the previous one, in
/// parallel, starting from the exact family at `t0` and measuring the max
/// error at `t1`.
pub fn convergence_study<T: Real>(
    base: &SolverConfig<T>,
    family: &SolutionFamily<T>,
    levels: usize,
) -> Result<ConvergenceStudy<T>> {
    if levels < 2 {
        return Err(domain!("a convergence study needs at least two levels"));
    }
    let configs: Vec<SolverConfig<T>> = (0..levels).map(|k| base.with_nr((base.nr - 1) * (1 << k) + 1)).collect();
    let errors: Vec<T> = configs
        .par_iter()
        .map(|c| march(c, Initial::Family(family), Some(family))?.max_error(family))
        .collect::<Result<_>>()?;
    let ratios: Vec<T> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConvergenceStudy {
        nr: configs.iter().map(|c| c.nr).collect(),
        h: configs.iter().map(|c| c.h()).collect(),
        orders: ratios.iter().map(|r| r.log2()).collect(),
        ratios,
        errors,
    })
}

/// A negative Gaussian bump of depth `depth` centred at `center`, corrected
/// linearly so it vanishes at `r = 0` and `r = r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump<T> {
    pub depth: T,
    pub center: T,
    pub width: T,
}

impl<T: Real> Bump<T> {
    pub fn profile(&self, r: &[T]) -> Vec<T> {
        let g = |x: T| -self.depth * (-((x - self.center) / self.width).powi(2)).exp();
        let (r0, r1) = (r[0], r[r.len() - 1]);
        let (g0, g1) = (g(r0), g(r1));
        r.iter()
            .map(|&x| {
                let s = (x - r0) / (r1 - r0);
                g(x) - (g0 * (T::one() - s) + g1 * s)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinPrincipleReport<T> {
    pub min_history: Vec<T>,
    pub max_history: Vec<T>,
    /// Slack `depth (h / width)^2` allowed for discretisation error.
    pub epsilon_h: T,
    /// Largest step-to-step decrease of the minimum (zero if none).
    pub max_decrease: T,
    pub non_decreasing: bool,
    /// Largest value reached above the initial and boundary maximum.
    pub max_overshoot: T,
    /// `mu (u_rr - (n-1) u / r^2)` at the initial discrete minimum.
    pub rate_at_minimum: T,
    pub initial_min: T,
    pub final_min: T,
}

/// Marches a negative bump with zero boundary values and checks that the
/// minimum does not decrease beyond `epsilon_h`.
pub fn min_principle_experiment<T: Real>(cfg: &SolverConfig<T>, bump: &Bump<T>) -> Result<MinPrincipleReport<T>> {
    if cfg.left != LeftBoundary::DirichletZero {
        return Err(Error::Config("the bump experiment uses u = 0 at the origin".into()));
    }
    if !(bump.depth >= T::zero() && bump.width > T::zero()) {
        return Err(domain!("bump needs depth >= 0 and width > 0"));
    }
    let r = cfg.radii();
    let u0 = bump.profile(&r);
    let run = march(cfg, Initial::Profile(&u0), None)?;

    let h = cfg.h();
    let epsilon_h = bump.depth * (h / bump.width).powi(2);
    let (initial_min, initial_max) = extrema(&u0);
    let mut max_decrease = T::zero();
    let mut prev = initial_min;
    for &m in &run.min_history {
        max_decrease = max_decrease.max(prev - m);
        prev = m;
    }
    let top = initial_max.max(T::zero());
    let max_overshoot = run.max_history.iter().fold(T::zero(), |a, &m| a.max(m - top));

    let i =
        (1..r.len() - 1).min_by(|&a, &b| u0[a].partial_cmp(&u0[b]).unwrap_or(std::cmp::Ordering::Equal)).unwrap_or(1);
    let u_rr = (u0[i + 1] - T::lit(2.0) * u0[i] + u0[i - 1]) / (h * h);
    let rate_at_minimum = cfg.mu * (u_rr - T::of_usize(cfg.n - 1) * u0[i] / (r[i] * r[i]));

    Ok(MinPrincipleReport {
        non_decreasing: max_decrease <= epsilon_h,
        final_min: *run.min_history.last().unwrap_or(&initial_min),
        min_history: run.min_history,
        max_history: run.max_history,
        epsilon_h,
        max_decrease,
        max_overshoot,
        rate_at_minimum,
        initial_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_small_system() {
        // [2 1 0; 1 2 1; 0 1 2] x = [4 8 8] -> x = [1 2 3]
        let (a, b, c) = ([0.0, 1.0, 1.0], [2.0, 2.0, 2.0], [1.0, 1.0, 0.0]);
        let mut d = [4.0_f64, 8.0, 8.0];
        thomas(&a, &b, &c, &mut d);
        for (x, e) in d.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(3, 0.1, 1.0, 64, 1e-3, 2e-3).is_ok());
        assert!(SolverConfig::new(3, 0.1, 1.0, 64, 2e-3, 1e-3).is_err());
        assert!(SolverConfig::new(3, 0.1, 1.0, 4, 1e-3, 2e-3).is_err());
        assert!(SolverConfig::new(3, 0.1, 1.0, 64, 1e-3, 2e-3).unwrap().with_cfl(1.5).validate().is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let cfg = SolverConfig::new(3, 0.1, 1.0, 64, 1.0, 2.0).unwrap();
        let zero = vec![0.0; 64];
        for scheme in [Scheme::CrankNicolson, Scheme::Rk2] {
            let run = march(&cfg.with_scheme(scheme), Initial::Profile(&zero), None).unwrap();
            assert!(run.u.iter().all(|v| *v == 0.0));
            assert_eq!(run.min_history.len(), run.steps);
        }
    }
}
