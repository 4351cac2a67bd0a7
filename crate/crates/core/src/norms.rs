//! L^p, Sobolev and sup norms of radial solutions over grids of times, and
//! log-log decay fits of the results.
//!
//! All integrals are taken over the whole of `R^n`, so the angular measure
//! `2 pi^{n/2} / Gamma(n/2)` is included. Values are norms, not p-th powers,
//! so a profile whose `norm^p ~ t^{(n-p)/2}` shows slope `(n-p)/(2p)`.
//!
//! Integrability is decided from the endpoint behaviour in
//! [`Asymptotics`] before any quadrature is attempted.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_semi_infinite, lemma2_j, Decay, Integrand, QuadResult};
use crate::scalar::Real;
use crate::solutions::{Asymptotics, Quotients, RadialSolution, SolutionFamily, Tail};
use crate::specfun::sphere_area;

/// Relative tolerance requested from every norm quadrature.
pub const NORM_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Lp,
    GradLp,
    HessBoundLp,
    /// Exact Frobenius norm of the Hessian (cross-check for the bound).
    HessLp,
    Linf,
    LpDistance,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Lp => "lp",
            NormKind::GradLp => "grad_lp",
            NormKind::HessBoundLp => "hess_bound_lp",
            NormKind::HessLp => "hess_lp",
            NormKind::Linf => "linf",
            NormKind::LpDistance => "lp_distance",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lp" => NormKind::Lp,
            "grad_lp" | "grad" => NormKind::GradLp,
            "hess_bound_lp" | "hess_bound" => NormKind::HessBoundLp,
            "hess_lp" | "hess" => NormKind::HessLp,
            "linf" => NormKind::Linf,
            "lp_distance" | "distance" => NormKind::LpDistance,
            other => return Err(Error::Config(format!("unknown norm kind '{other}'"))),
        })
    }
}

/// Which functional to evaluate. `p < n` (Lp), `p < n/2` (GradLp) and
/// `p < n/3` (HessBoundLp) are where vanishing is expected; they are not
/// enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec<T> {
    pub kind: NormKind,
    pub p: T,
    pub n: usize,
}

impl<T: Real> NormSpec<T> {
    pub fn new(kind: NormKind, p: T, n: usize) -> Result<Self> {
        if kind != NormKind::Linf && !(p >= T::one() && p.is_finite()) {
            return Err(domain!("norm exponent must satisfy p >= 1, got {p:e}"));
        }
        Ok(Self { kind, p, n })
    }

    /// The exponent below which the functional is expected to vanish as `t -> 0`.
    pub fn critical_exponent(&self) -> Option<T> {
        let n = T::of_usize(self.n);
        match self.kind {
            NormKind::Lp | NormKind::LpDistance => Some(n),
            NormKind::GradLp => Some(n / T::lit(2.0)),
            NormKind::HessBoundLp | NormKind::HessLp => Some(n / T::lit(3.0)),
            NormKind::Linf => None,
        }
    }
}

/// One evaluated norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue<T> {
    pub value: T,
    pub quad_error: T,
    /// Location of the maximum, for sup norms.
    pub argmax: Option<T>,
}

/// Exact gradient norm together with the two bound integrals
/// `B1 = t^{-p} int r^{n-1} / f^p` and `B2 = t^{-2p} int r^{2p+n-1} / f^p`,
/// where `u = r / (t f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradNorm<T> {
    pub norm: NormValue<T>,
    pub bound_integrals: Option<[QuadResult<T>; 2]>,
    /// `(omega 2^{p-1} [n^{p/2} B1 + (2 mu)^{-p} B2])^{1/p}`, which dominates
    /// the exact norm by the triangle inequality.
    pub bound: Option<T>,
}

/// The three Hessian bound integrals and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessBound<T> {
    pub terms: [QuadResult<T>; 3],
    /// Sum of the three integrals (a p-th power quantity).
    pub sum: T,
    /// `sum^{1/p}`, comparable with the other norms.
    pub value: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinfResult<T> {
    /// `+inf` when the profile is unbounded.
    pub value: T,
    pub argmax: Option<T>,
    pub unbounded: bool,
}

/// Per-point outcome in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFlag {
    Ok,
    NonConverged,
    Divergent,
    Unbounded,
    Failed,
}

impl PointFlag {
    pub fn name(self) -> &'static str {
        match self {
            PointFlag::Ok => "ok",
            PointFlag::NonConverged => "non_converged",
            PointFlag::Divergent => "divergent",
            PointFlag::Unbounded => "unbounded",
            PointFlag::Failed => "failed",
        }
    }
}

/// A norm evaluated on a grid of times. Every grid point is kept; failed
/// points carry a flag and a message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport<T> {
    pub family: String,
    pub reference: Option<String>,
    pub spec: NormSpec<T>,
    pub t: Vec<T>,
    pub values: Vec<T>,
    pub quad_errors: Vec<T>,
    pub flags: Vec<PointFlag>,
    pub argmax: Vec<Option<T>>,
    pub messages: Vec<Option<String>>,
}

impl<T: Real> NormReport<T> {
    pub fn all_ok(&self) -> bool {
        self.flags.iter().all(|f| *f == PointFlag::Ok)
    }

    pub fn any_flag(&self, flag: PointFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.all_ok() && self.values.windows(2).all(|w| w[1] < w[0])
    }

    pub fn strictly_increasing(&self) -> bool {
        self.all_ok() && self.values.windows(2).all(|w| w[1] > w[0])
    }

    /// `last / first` of the values.
    pub fn final_ratio(&self) -> Option<T> {
        Some(*self.values.last()? / *self.values.first()?)
    }
}

/// Least-squares fit of `ln value = slope ln t + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit<T> {
    pub slope: T,
    pub intercept: T,
    pub max_log_residual: T,
    pub t: Vec<T>,
    pub values: Vec<T>,
}

/// `count` logarithmically spaced points from `start` to `end` inclusive.
pub fn log_grid<T: Real>(start: T, end: T, count: usize) -> Result<Vec<T>> {
    if !(start > T::zero() && end > T::zero()) || !start.is_finite() || !end.is_finite() {
        return Err(domain!("log grid endpoints must be positive and finite"));
    }
    if count < 2 {
        return Err(domain!("log grid needs at least two points"));
    }
    let (a, b) = (start.ln(), end.ln());
    let last = T::of_usize(count - 1);
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                start
            } else if i == count - 1 {
                end
            } else {
                (a + (b - a) * T::of_usize(i) / last).exp()
            }
        })
        .collect())
}

/// The default sweep: 13 points from `1e-2` down to `1e-8`.
pub fn default_t_grid<T: Real>() -> Vec<T> {
    log_grid(T::lit(1e-2), T::lit(1e-8), 13).expect("valid default grid")
}

fn check_t<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero() && t.is_finite()) {
        return Err(domain!("norms need t > 0, got {t:e}"));
    }
    Ok(())
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if !(p >= T::one() && p.is_finite()) {
        return Err(domain!("norm exponent must satisfy p >= 1, got {p:e}"));
    }
    Ok(())
}

/// Power counting at both ends for `|D^k u|^p r^{n-1}`, returning the
/// quadrature hints.
fn integrand_hints<T: Real>(
    asym: &Asymptotics<T>,
    regular: bool,
    derivs: usize,
    p: T,
    n: usize,
) -> Result<(T, Decay<T>)> {
    if let Some(r0) = asym.pole {
        return Err(Error::Divergent(format!("profile has a non-integrable pole at r = {r0:e}")));
    }
    let k = T::of_usize(derivs);
    let measure = T::of_usize(n - 1);
    let origin = if derivs > 0 && regular { T::zero() } else { asym.origin_exponent - k };
    let at_zero = p * origin + measure;
    if !(at_zero > -T::one()) {
        return Err(Error::Divergent(format!(
            "integrand ~ r^{at_zero} at r = 0 (|D^{derivs} u| ~ r^{origin}, p = {p}, n = {n})"
        )));
    }
    let decay = match asym.tail {
        Tail::Gaussian { length } => Decay::Gaussian { length },
        Tail::Zero => Decay::Exponential { rate: asym.scale.recip() },
        Tail::Power { exponent, .. } => {
            let at_inf = p * (exponent - k) + measure;
            if !(at_inf < -T::one()) {
                return Err(Error::Divergent(format!(
                    "integrand ~ r^{at_inf} at infinity (|D^{derivs} u| ~ r^{}, p = {p}, n = {n})",
                    exponent - k
                )));
            }
            Decay::Algebraic { exponent: at_inf }
        }
    };
    Ok((at_zero, decay))
}

/// Integrates `exp(ln_density(r)) * r^{n-1}` with the given hints and
/// returns `(omega int)^{1/p}` with a propagated error estimate.
///
/// The integrand is normalised by its value at `layer` so that profiles of
/// size `1e150` (or `1e-150`) do not overflow once raised to the power `p`.
/// Evaluation errors inside the integrand are surfaced instead of being
/// integrated as NaN.
fn radial_norm<T: Real>(
    ln_density: impl Fn(T) -> Result<T>,
    n: usize,
    p: T,
    at_zero: T,
    layer: T,
    decay: Decay<T>,
) -> Result<NormValue<T>> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let measure = T::of_usize(n - 1);
    let ln_layer = layer.ln();
    let shift = match ln_density(layer) {
        Ok(l) if l.is_finite() => l,
        Ok(_) => T::zero(),
        Err(e) => return Err(e),
    };
    let f = |r: T| -> T {
        if r <= T::zero() {
            return T::zero();
        }
        match ln_density(r) {
            Ok(l) => (l - shift + measure * (r.ln() - ln_layer)).exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::nan()
            }
        }
    };
    let integrand = Integrand::new(f).power_at_zero(at_zero).layer(layer).decay(decay);
    let ln_prefactor = sphere_area::<T>(n).ln() + shift + measure * ln_layer;
    let res = integrate_semi_infinite(&integrand, T::lit(NORM_REL_TOL), T::zero());
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let finish = |value: T, err: T| {
        if !(value > T::zero()) {
            return (T::zero(), T::zero());
        }
        let norm = ((ln_prefactor + value.ln()) / p).exp();
        (norm, norm * (err / value) / p)
    };
    match res {
        Ok(q) => {
            let (value, quad_error) = finish(q.value, q.abs_error_estimate);
            Ok(NormValue { value, quad_error, argmax: None })
        }
        Err(Error::NonConvergence { value, estimate, subdivisions, .. }) => {
            let (v, e) = finish(T::lit(value), T::lit(estimate));
            Err(Error::NonConvergence {
                value: v.as_f64(),
                estimate: e.as_f64(),
                requested: NORM_REL_TOL * v.as_f64() / p.as_f64(),
                subdivisions,
            })
        }
        Err(e) => Err(e),
    }
}

/// `ln |Du|` for the Frobenius norm, from `|Du|^2 = u_r^2 + (n-1) (u/r)^2`.
pub fn ln_gradient_frobenius<T: Real>(q: &Quotients<T>, r: T, n: usize) -> T {
    let u_r = q.v + r * r * q.v_r_over_r;
    ln_hypot(u_r, q.v, T::of_usize(n - 1))
}

/// `ln |D^2 u|` for the Frobenius norm over all `(i, j, k)`. With
/// `S = v_r / r` and `T3 = (1/r)(v_r/r)_r` the squared norm is
/// `T3^2 r^6 + 6 T3 S r^4 + (3n + 6) S^2 r^2`.
pub fn ln_hessian_frobenius<T: Real>(q: &Quotients<T>, r: T, n: usize) -> T {
    let (a, b) = (q.third * r * r * r, q.v_r_over_r * r);
    let m = a.abs().max(b.abs());
    if m == T::zero() {
        return T::neg_infinity();
    }
    let (x, y) = (a / m, b / m);
    let c = T::lit(3.0) * T::of_usize(n) + T::lit(6.0);
    let sq = (x * x + T::lit(6.0) * x * y + c * y * y).max(T::zero());
    m.ln() + sq.ln() / T::lit(2.0)
}

/// `ln sqrt(a^2 + w b^2)` without overflow.
fn ln_hypot<T: Real>(a: T, b: T, w: T) -> T {
    let m = a.abs().max(b.abs());
    if m == T::zero() {
        return T::neg_infinity();
    }
    let (x, y) = (a / m, b / m);
    m.ln() + (x * x + w * y * y).ln() / T::lit(2.0)
}

/// `(omega int_0^inf |u(t,r)|^p r^{n-1} dr)^{1/p}`.
pub fn lp_norm<T: Real, S: RadialSolution<T> + ?Sized>(s: &S, p: T, t: T) -> Result<NormValue<T>> {
    check_t(t)?;
    check_p(p)?;
    let n = s.params().n;
    let asym = s.asymptotics(t);
    let (at_zero, decay) = integrand_hints(&asym, s.origin_regular(), 0, p, n)?;
    radial_norm(|r| Ok(p * s.u(t, r)?.abs().ln()), n, p, at_zero, asym.scale, decay)
}

/// Endpoint behaviour of `a - b`, accounting for cancellation of matching
/// leading terms.
pub fn difference_asymptotics<T: Real>(a: &Asymptotics<T>, b: &Asymptotics<T>) -> Result<Asymptotics<T>> {
    let same = |x: T, y: T| (x - y).abs() <= T::lit(1e-12) * x.abs().max(y.abs());

    let (origin_exponent, origin_coefficient, origin_next_exponent) = if a.origin_exponent < b.origin_exponent {
        (a.origin_exponent, a.origin_coefficient, a.origin_next_exponent)
    } else if b.origin_exponent < a.origin_exponent {
        (b.origin_exponent, -b.origin_coefficient, b.origin_next_exponent)
    } else if !same(a.origin_coefficient, b.origin_coefficient) {
        (a.origin_exponent, a.origin_coefficient - b.origin_coefficient, None)
    } else {
        match (a.origin_next_exponent, b.origin_next_exponent) {
            (Some(x), Some(y)) => (x.min(y), T::zero(), None),
            (Some(x), None) | (None, Some(x)) => (x, T::zero(), None),
            // identical near the origin: any exponent that is integrable
            (None, None) => (T::zero(), T::zero(), None),
        }
    };

    let tail = combine_tails(&a.tail, &b.tail, a.tail_remainder, b.tail_remainder)?;
    Ok(Asymptotics {
        origin_exponent,
        origin_coefficient,
        origin_next_exponent,
        tail,
        tail_remainder: None,
        pole: match (a.pole, b.pole) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        },
        scale: a.scale.min(b.scale),
    })
}

fn combine_tails<T: Real>(a: &Tail<T>, b: &Tail<T>, rem_a: Option<Tail<T>>, rem_b: Option<Tail<T>>) -> Result<Tail<T>> {
    use Tail::*;
    Ok(match (*a, *b) {
        (Zero, x) => negate(x),
        (x, Zero) => x,
        (Gaussian { length: la }, Gaussian { length: lb }) => Gaussian { length: la.max(lb) },
        (Power { .. }, Gaussian { .. }) => *a,
        (Gaussian { .. }, Power { .. }) => negate(*b),
        (Power { exponent: ea, coefficient: ca }, Power { exponent: eb, coefficient: cb }) => {
            if ea > eb {
                *a
            } else if eb > ea {
                negate(*b)
            } else if (ca - cb).abs() > T::lit(1e-12) * ca.abs().max(cb.abs()) {
                Power { exponent: ea, coefficient: ca - cb }
            } else {
                // leading tails cancel; the remainders decide
                match (rem_a, rem_b) {
                    (Some(x), Some(y)) => combine_tails(&x, &y, None, None)?,
                    _ => return Err(Error::Unsupported("leading tails cancel and the next order is unknown".into())),
                }
            }
        }
    })
}

fn negate<T: Real>(tail: Tail<T>) -> Tail<T> {
    match tail {
        Tail::Power { exponent, coefficient } => Tail::Power { exponent, coefficient: -coefficient },
        other => other,
    }
}

/// Full `R^n` L^p norm of `s(t) - reference(t)`.
pub fn lp_distance<T: Real, S, R>(s: &S, reference: &R, p: T, t: T) -> Result<NormValue<T>>
where
    S: RadialSolution<T> + ?Sized,
    R: RadialSolution<T> + ?Sized,
{
    check_t(t)?;
    check_p(p)?;
    let n = s.params().n;
    if reference.params().n != n {
        return Err(domain!("distance between families of dimension {n} and {}", reference.params().n));
    }
    let asym = difference_asymptotics(&s.asymptotics(t), &reference.asymptotics(t))?;
    let regular = s.origin_regular() && reference.origin_regular();
    let (at_zero, decay) = integrand_hints(&asym, regular, 0, p, n)?;
    radial_norm(|r| Ok(p * (s.u(t, r)? - reference.u(t, r)?).abs().ln()), n, p, at_zero, asym.scale, decay)
}

/// Exact Frobenius L^p norm of the Jacobian, using
/// `|Du|^2 = u_r^2 + (n-1) (u/r)^2`, plus the two bound integrals when the
/// family is the main example.
pub fn grad_lp_norm<T: Real>(s: &SolutionFamily<T>, p: T, t: T) -> Result<GradNorm<T>> {
    check_t(t)?;
    check_p(p)?;
    let params = s.params();
    let n = params.n;
    let asym = s.asymptotics(t);
    let (at_zero, decay) = integrand_hints(&asym, s.origin_regular(), 1, p, n)?;
    let measure = T::of_usize(n - 1);
    let half_p = p / T::lit(2.0);
    let norm =
        radial_norm(|r| Ok(p * ln_gradient_frobenius(&s.quotients(t, r)?, r, n)), n, p, at_zero, asym.scale, decay)?;

    let (bound_integrals, bound) = match s {
        SolutionFamily::MainExample(_) if params.a > T::zero() => {
            let b = main_example_b(&params);
            let b1 = lemma2_j(-p, measure, b, p, n, params.mu, t)?;
            let b2 = lemma2_j(-T::lit(2.0) * p, T::lit(2.0) * p + measure, b, p, n, params.mu, t)?;
            let two = T::lit(2.0);
            let weighted = sphere_area::<T>(n)
                * two.powf(p - T::one())
                * (T::of_usize(n).powf(half_p) * b1.value + (two * params.mu).powf(-p) * b2.value);
            (Some([b1, b2]), Some(weighted.powf(p.recip())))
        }
        _ => (None, None),
    };
    Ok(GradNorm { norm, bound_integrals, bound })
}

/// `b = a (4 pi mu)^{n/2}`, so that `f = 1 + b t^{n/2} e^{r^2 / 4 mu t}`.
fn main_example_b<T: Real>(p: &crate::solutions::Params<T>) -> T {
    p.a * (T::lit(4.0) * T::PI() * p.mu).powf(T::of_usize(p.n) / T::lit(2.0))
}

/// Sum of the three Hessian bound integrals
/// `t^{-p} int r^{n-p-1}/f^p + t^{-2p} int r^{p+n-1}/f^p + t^{-3p} int r^{3p+n-1}/f^p`.
///
/// Only defined for the main example. A first term with `n - p - 1 <= -1`
/// is reported as divergent.
pub fn hess_bound_lp<T: Real>(s: &SolutionFamily<T>, p: T, t: T) -> Result<HessBound<T>> {
    check_t(t)?;
    check_p(p)?;
    let params = match s {
        SolutionFamily::MainExample(m) => m.params(),
        other => {
            return Err(Error::Unsupported(format!(
                "Hessian bounds are only available for the main example, not {}",
                other.kind()
            )))
        }
    };
    if !(params.a > T::zero()) {
        return Err(Error::Divergent("a = 0 has no Gaussian cutoff".into()));
    }
    let n = T::of_usize(params.n);
    let b = main_example_b(&params);
    let one = T::one();
    let (two, three) = (T::lit(2.0), T::lit(3.0));
    let exps = [(-p, n - p - one), (-two * p, p + n - one), (-three * p, three * p + n - one)];
    let mut terms = Vec::with_capacity(3);
    for (d, c) in exps {
        if !(c > -one) {
            return Err(Error::Divergent(format!("bound term r^{c} / f^p is not integrable at r = 0")));
        }
        terms.push(lemma2_j(d, c, b, p, params.n, params.mu, t)?);
    }
    let terms = [terms[0], terms[1], terms[2]];
    let sum = terms.iter().map(|q| q.value).sum::<T>();
    Ok(HessBound { terms, sum, value: sum.powf(p.recip()) })
}

/// Exact Frobenius L^p norm of the Hessian, see [`ln_hessian_frobenius`].
pub fn hess_lp_norm<T: Real>(s: &SolutionFamily<T>, p: T, t: T) -> Result<NormValue<T>> {
    check_t(t)?;
    check_p(p)?;
    let n = s.params().n;
    let asym = s.asymptotics(t);
    let (at_zero, decay) = integrand_hints(&asym, s.origin_regular(), 2, p, n)?;
    radial_norm(|r| Ok(p * ln_hessian_frobenius(&s.quotients(t, r)?, r, n)), n, p, at_zero, asym.scale, decay)
}

/// `sup_r |u(t, r)|` by golden-section search on a bracket certified by a
/// sign change of `u_r`.
pub fn linf_norm<T: Real, S: RadialSolution<T> + ?Sized>(s: &S, t: T) -> Result<LinfResult<T>> {
    check_t(t)?;
    let asym = s.asymptotics(t);
    let grows = matches!(asym.tail, Tail::Power { exponent, .. } if exponent > T::zero());
    if asym.pole.is_some() || asym.origin_exponent < T::zero() || grows {
        return Ok(LinfResult { value: T::infinity(), argmax: None, unbounded: true });
    }
    let slope = |r: T| -> Result<T> { Ok(s.jet(t, r)?.u_r) };
    let scale = asym.scale;
    let two = T::lit(2.0);

    let mut lo = scale * T::lit(1e-6);
    if !(slope(lo)? > T::zero()) {
        return Err(Error::Bracket(format!("u_r is not positive near the origin (r = {lo:e})")));
    }
    let mut hi = scale;
    let limit = scale * T::lit(1e6);
    while slope(hi)? > T::zero() {
        lo = hi;
        hi = hi * two;
        if hi > limit {
            return Err(Error::Bracket(format!("u_r stays positive up to r = {limit:e}")));
        }
    }

    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / two;
    let u = |r: T| -> Result<T> { Ok(s.u(t, r)?.abs()) };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (u(c)?, u(d)?);
    let tol = T::lit(1e-12);
    for _ in 0..200 {
        if b - a <= tol * (a + b) / two {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = u(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = u(d)?;
        }
    }
    let (r_best, v_best) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(LinfResult { value: v_best, argmax: Some(r_best), unbounded: false })
}

/// Evaluates one functional at one time.
pub fn evaluate<T: Real>(
    s: &SolutionFamily<T>,
    spec: &NormSpec<T>,
    reference: Option<&SolutionFamily<T>>,
    t: T,
) -> Result<NormValue<T>> {
    if s.params().n != spec.n {
        return Err(domain!("norm spec is for n = {}, family has n = {}", spec.n, s.params().n));
    }
    match spec.kind {
        NormKind::Lp => lp_norm(s, spec.p, t),
        NormKind::LpDistance => {
            let r = reference.ok_or_else(|| Error::Config("lp_distance needs a reference family".into()))?;
            lp_distance(s, r, spec.p, t)
        }
        NormKind::GradLp => Ok(grad_lp_norm(s, spec.p, t)?.norm),
        NormKind::HessBoundLp => {
            let h = hess_bound_lp(s, spec.p, t)?;
            let err = h.terms.iter().map(|q| q.abs_error_estimate).sum::<T>();
            Ok(NormValue { value: h.value, quad_error: h.value * err / (spec.p * h.sum), argmax: None })
        }
        NormKind::HessLp => hess_lp_norm(s, spec.p, t),
        NormKind::Linf => {
            let l = linf_norm(s, t)?;
            if l.unbounded {
                return Err(Error::Divergent("profile is unbounded".into()));
            }
            Ok(NormValue { value: l.value, quad_error: T::zero(), argmax: l.argmax })
        }
    }
}

/// `(value, error, flag, argmax, message)` for one time.
type SweepPoint<T> = (T, T, PointFlag, Option<T>, Option<String>);

/// Evaluates a functional over a grid of times in parallel. Results are
/// ordered by grid index and no point is dropped.
pub fn norm_report<T: Real>(
    s: &SolutionFamily<T>,
    spec: &NormSpec<T>,
    reference: Option<&SolutionFamily<T>>,
    ts: &[T],
) -> NormReport<T> {
    let points: Vec<SweepPoint<T>> = ts
        .par_iter()
        .map(|&t| match evaluate(s, spec, reference, t) {
            Ok(v) => (v.value, v.quad_error, PointFlag::Ok, v.argmax, None),
            Err(Error::NonConvergence { value, estimate, .. }) => (
                T::lit(value),
                T::lit(estimate),
                PointFlag::NonConverged,
                None,
                Some("quadrature did not reach the requested tolerance".to_string()),
            ),
            Err(Error::Divergent(msg)) => {
                let flag = if spec.kind == NormKind::Linf { PointFlag::Unbounded } else { PointFlag::Divergent };
                (T::infinity(), T::zero(), flag, None, Some(msg))
            }
            Err(e) => (T::nan(), T::nan(), PointFlag::Failed, None, Some(e.to_string())),
        })
        .collect();
    NormReport {
        family: s.label(),
        reference: reference.map(|r| r.label()),
        spec: *spec,
        t: ts.to_vec(),
        values: points.iter().map(|p| p.0).collect(),
        quad_errors: points.iter().map(|p| p.1).collect(),
        flags: points.iter().map(|p| p.2).collect(),
        argmax: points.iter().map(|p| p.3).collect(),
        messages: points.into_iter().map(|p| p.4).collect(),
    }
}

/// Least-squares slope of `ln value` against `ln t` over the converged,
/// positive points of a report.
pub fn decay_fit<T: Real>(report: &NormReport<T>) -> Result<DecayFit<T>> {
    let (t, values): (Vec<T>, Vec<T>) = report
        .t
        .iter()
        .zip(&report.values)
        .zip(&report.flags)
        .filter(|((_, v), f)| **f == PointFlag::Ok && **v > T::zero() && v.is_finite())
        .map(|((t, v), _)| (*t, *v))
        .unzip();
    if t.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} usable points, need at least 4", t.len())));
    }
    let (vmin, vmax) = values.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if vmax / vmin < T::lit(10.0) {
        return Err(Error::DegenerateFit(format!("values span only {:.3} decades", (vmax / vmin).log10())));
    }
    let xs: Vec<T> = t.iter().map(|t| t.ln()).collect();
    let ys: Vec<T> = values.iter().map(|v| v.ln()).collect();
    let m = T::of_usize(xs.len());
    let xbar = xs.iter().copied().sum::<T>() / m;
    let ybar = ys.iter().copied().sum::<T>() / m;
    let sxx = xs.iter().map(|x| (*x - xbar) * (*x - xbar)).sum::<T>();
    let sxy = xs.iter().zip(&ys).map(|(x, y)| (*x - xbar) * (*y - ybar)).sum::<T>();
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateFit("all grid times are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let max_log_residual =
        xs.iter().zip(&ys).map(|(x, y)| (*y - (slope * *x + intercept)).abs()).fold(T::zero(), T::max);
    Ok(DecayFit { slope, intercept, max_log_residual, t, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{main_example, self_similar, stationary, Params};

    #[test]
    fn log_grid_endpoints() {
        let g = default_t_grid::<f64>();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 1e-2);
        assert_eq!(g[12], 1e-8);
        assert!((g[2] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn stationary_diverges_for_every_p() {
        let s = stationary(Params::new(3, 0.1)).unwrap();
        for p in [1.0, 2.0, 3.0, 4.5] {
            assert!(matches!(lp_norm(&s, p, 1e-3), Err(Error::Divergent(_))), "p = {p}");
        }
    }

    #[test]
    fn degenerate_main_example_diverges() {
        let s = main_example(Params::new(3, 0.1_f64).with_a(0.0)).unwrap();
        assert!(matches!(lp_norm(&s, 1.0, 1e-3), Err(Error::Divergent(_))));
        let l = linf_norm(&s, 1e-3).unwrap();
        assert!(l.unbounded && l.value.is_infinite());
    }

    #[test]
    fn self_similar_distance_to_itself_is_zero() {
        let s = self_similar(Params::new(3, 0.1).with_a(1.0)).unwrap();
        let d = lp_distance(&s, &s, 2.0, 1e-3).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn decay_fit_recovers_power_law() {
        let t = default_t_grid::<f64>();
        let values: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(0.75)).collect();
        let n = t.len();
        let report = NormReport {
            family: "synthetic".into(),
            reference: None,
            spec: NormSpec::new(NormKind::Lp, 1.0, 3).unwrap(),
            t,
            values,
            quad_errors: vec![0.0; n],
            flags: vec![PointFlag::Ok; n],
            argmax: vec![None; n],
            messages: vec![None; n],
        };
        let fit = decay_fit(&report).unwrap();
        assert!((fit.slope - 0.75).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(fit.max_log_residual < 1e-12);
    }
}
