//! Adaptive Gauss–Kronrod integration on `(0, inf)`.
//!
//! The integrands met in this crate are smooth, possibly power-singular at the
//! origin, with one interior layer and a Gaussian or exponential tail. The
//! domain is split at a caller-supplied layer location; the inner piece gets a
//! power substitution when the integrand is singular at zero, and the tail is
//! covered by geometrically growing panels until the decay certificate says the
//! remainder is negligible. The resulting partition is then refined globally,
//! largest error first, with the 15-point Kronrod rule.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::specfun::log1pexp;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default cap on the number of subintervals.
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 10_000;

/// Tail behaviour of an integrand, used to certify truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay<T> {
    /// Bounded by `C exp(-(r/length)^2)` past the layer.
    Gaussian { length: T },
    /// Bounded by `C exp(-rate r)` past the layer.
    Exponential { rate: T },
    /// `~ r^exponent` with `exponent < -1`.
    Algebraic { exponent: T },
}

/// A function on `(0, inf)` together with hints about where its mass sits.
pub struct Integrand<T, F> {
    f: F,
    power_at_zero: T,
    layer: Option<T>,
    decay: Decay<T>,
}

impl<T: Real, F: Fn(T) -> T> Integrand<T, F> {
    pub fn new(f: F) -> Self {
        Self { f, power_at_zero: T::zero(), layer: None, decay: Decay::Exponential { rate: T::one() } }
    }

    /// Leading exponent `k` of `f(r) ~ r^k` as `r -> 0+`; must exceed `-1`.
    pub fn power_at_zero(mut self, k: T) -> Self {
        self.power_at_zero = k;
        self
    }

    /// Location of the interior layer (roughly the integrand's argmax or the
    /// point past which it starts to decay).
    pub fn layer(mut self, r: T) -> Self {
        self.layer = Some(r);
        self
    }

    pub fn decay(mut self, decay: Decay<T>) -> Self {
        self.decay = decay;
        self
    }

    #[inline]
    pub fn eval(&self, r: T) -> T {
        (self.f)(r)
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error_estimate: T,
    pub subdivisions: usize,
}

impl<T: Real> QuadResult<T> {
    /// Multiplies value and error estimate by a positive constant.
    pub fn scaled(self, c: T) -> Self {
        Self {
            value: self.value * c,
            abs_error_estimate: self.abs_error_estimate * c.abs(),
            subdivisions: self.subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    /// Evaluate through the inner power map instead of the identity.
    mapped: bool,
    frozen: bool,
}

/// QUADPACK's error rescaling for the Gauss/Kronrod difference.
fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut e = err.abs();
    if res_asc != T::zero() && e != T::zero() {
        let scale = (T::lit(200.0) * e / res_asc).powf(T::lit(1.5));
        e = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let fifty_eps = T::lit(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        let floor = fifty_eps * res_abs;
        if floor > e {
            e = floor;
        }
    }
    e
}

/// One application of the 15-point Kronrod rule with its embedded 7-point
/// Gauss estimate. Returns `(value, error)`.
pub fn gk15<T: Real, F: Fn(T) -> T + ?Sized>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);
    let mut res_g = f_center * T::lit(WG[3]);
    let mut res_k = f_center * T::lit(WGK[7]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let x = half_len * T::lit(XGK[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + T::lit(WGK[j]) * (f1 + f2);
        res_abs = res_abs + T::lit(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (f_center - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let hl = half_len.abs();
    let err = (res_k - res_g) * half_len;
    let value = res_k * half_len;
    (value, rescale_error(err, res_abs * hl, res_asc * hl))
}

/// Globally adaptive bisection over an initial partition.
fn refine<T: Real>(
    segments: &mut Vec<Segment<T>>,
    eval: &dyn Fn(bool, T) -> T,
    rel_tol: T,
    abs_tol: T,
    extra_error: T,
    max_subdivisions: usize,
) -> Result<QuadResult<T>> {
    let total = |segs: &[Segment<T>]| -> (T, T) {
        // Fixed summation order keeps results bit-reproducible.
        segs.iter().fold((T::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.error))
    };
    loop {
        let (value, err) = total(segments);
        let err = err + extra_error;
        let target = abs_tol.max(rel_tol * value.abs());
        if err <= target {
            return Ok(QuadResult { value, abs_error_estimate: err, subdivisions: segments.len() });
        }
        if !value.is_finite() {
            return Err(domain!("integrand produced a non-finite value"));
        }
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.frozen)
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i);
        let exhausted = segments.len() >= max_subdivisions;
        let Some(i) = worst.filter(|_| !exhausted) else {
            return Err(Error::NonConvergence {
                value: value.as_f64(),
                estimate: err.as_f64(),
                requested: target.as_f64(),
                subdivisions: segments.len(),
            });
        };
        let s = segments[i];
        let mid = T::lit(0.5) * (s.a + s.b);
        let width = s.b - s.a;
        if width <= T::lit(100.0) * T::epsilon() * s.a.abs().max(s.b.abs()).max(T::min_positive_value()) {
            segments[i].frozen = true;
            continue;
        }
        let g = |x: T| eval(s.mapped, x);
        let (v1, e1) = gk15(&g, s.a, mid);
        let (v2, e2) = gk15(&g, mid, s.b);
        segments[i] = Segment { a: s.a, b: mid, value: v1, error: e1, mapped: s.mapped, frozen: false };
        segments.push(Segment { a: mid, b: s.b, value: v2, error: e2, mapped: s.mapped, frozen: false });
    }
}

/// Adaptive integral of `f` over a finite interval `[a, b]`.
///
/// Relative tolerances below `100 eps` are raised to that value.
pub fn integrate_interval<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, rel_tol: T, abs_tol: T) -> Result<QuadResult<T>> {
    let rel_tol = check_tolerances(rel_tol, abs_tol)?;
    let eval = |_: bool, x: T| f(x);
    let (value, error) = gk15(&|x| f(x), a, b);
    let mut segs = vec![Segment { a, b, value, error, mapped: false, frozen: false }];
    refine(&mut segs, &eval, rel_tol, abs_tol, T::zero(), DEFAULT_MAX_SUBDIVISIONS)
}

/// Validates the tolerances and raises `rel_tol` to the rounding floor of the
/// Kronrod error estimate (`50 eps` per panel), below which no amount of
/// bisection can certify the result.
fn check_tolerances<T: Real>(rel_tol: T, abs_tol: T) -> Result<T> {
    if !(rel_tol >= T::zero() && abs_tol >= T::zero()) || (rel_tol == T::zero() && abs_tol == T::zero()) {
        return Err(domain!("tolerances must be non-negative and not both zero"));
    }
    if rel_tol > T::zero() {
        return Ok(rel_tol.max(T::lit(100.0) * T::epsilon()));
    }
    Ok(rel_tol)
}

/// `int_0^inf f(r) dr` within `max(rel_tol |value|, abs_tol)`; `rel_tol` is
/// raised to at least `100 eps`.
pub fn integrate_semi_infinite<T: Real, F: Fn(T) -> T>(
    integrand: &Integrand<T, F>,
    rel_tol: T,
    abs_tol: T,
) -> Result<QuadResult<T>> {
    integrate_semi_infinite_with_cap(integrand, rel_tol, abs_tol, DEFAULT_MAX_SUBDIVISIONS)
}

pub fn integrate_semi_infinite_with_cap<T: Real, F: Fn(T) -> T>(
    integrand: &Integrand<T, F>,
    rel_tol: T,
    abs_tol: T,
    max_subdivisions: usize,
) -> Result<QuadResult<T>> {
    let rel_tol = check_tolerances(rel_tol, abs_tol)?;
    let k = integrand.power_at_zero;
    if !(k > -T::one()) {
        return Err(Error::Divergent(format!("integrand ~ r^{k:e} at 0 is not integrable")));
    }
    if let Decay::Algebraic { exponent } = integrand.decay {
        if !(exponent < -T::one()) {
            return Err(Error::Divergent(format!("integrand ~ r^{exponent:e} at infinity is not integrable")));
        }
    }
    let split = integrand.layer.filter(|l| *l > T::zero() && l.is_finite()).unwrap_or(T::one());

    // Inner piece [0, split] as r = split * x^m on x in [0, 1].
    let m = if k < T::zero() { (T::one() / (k + T::one())).ceil() } else { T::one() };
    let eval = |mapped: bool, x: T| -> T {
        if mapped {
            if x <= T::zero() {
                return T::zero();
            }
            let xm1 = x.powf(m - T::one());
            let r = split * xm1 * x;
            let v = integrand.eval(r) * m * split * xm1;
            if v.is_finite() {
                v
            } else {
                T::zero()
            }
        } else {
            integrand.eval(x)
        }
    };

    let mut segs = Vec::new();
    let g_in = |x: T| eval(true, x);
    let (v, e) = gk15(&g_in, T::zero(), T::one());
    segs.push(Segment { a: T::zero(), b: T::one(), value: v, error: e, mapped: true, frozen: false });
    let mut running = v;

    // Tail panels [x_j, x_j + w_j], w doubling.
    let g_out = |x: T| eval(false, x);
    let mut lo = split;
    let mut width = split;
    let ratio = match integrand.decay {
        Decay::Algebraic { exponent } => T::lit(2.0).powf(exponent + T::one()),
        _ => T::zero(),
    };
    let mut truncation = T::zero();
    let max_panels = 120;
    let mut converged_tail = false;
    for panel in 0..max_panels {
        let hi = lo + width;
        if !hi.is_finite() {
            break;
        }
        let (pv, pe) = gk15(&g_out, lo, hi);
        segs.push(Segment { a: lo, b: hi, value: pv, error: pe, mapped: false, frozen: false });
        running = running + pv;
        // Bound on everything past `hi`.
        let remainder = if ratio > T::zero() { pv.abs() * ratio / (T::one() - ratio) } else { pv.abs() };
        let target = abs_tol.max(rel_tol * running.abs());
        if panel >= 1 && remainder <= T::lit(0.1) * target && pe <= target {
            truncation = remainder;
            converged_tail = true;
            break;
        }
        lo = hi;
        width = width * T::lit(2.0);
    }
    if !converged_tail {
        return Err(Error::NonConvergence {
            value: running.as_f64(),
            estimate: f64::INFINITY,
            requested: abs_tol.max(rel_tol * running.abs()).as_f64(),
            subdivisions: segs.len(),
        });
    }
    refine(&mut segs, &eval, rel_tol, abs_tol, truncation, max_subdivisions)
}

/// `I(t) = t^q int_0^inf s^k / (1 + b t^{n/2} e^s)^l ds`.
///
/// Only integrability is enforced (`k > -1`, `b, l, t > 0`); the sign of `q`
/// decides whether `I(t)` vanishes as `t -> 0` and is left to the caller.
pub fn lemma1_i<T: Real>(q: T, k: T, b: T, l: T, n: usize, t: T) -> Result<QuadResult<T>> {
    if !(k > -T::one()) || !(b > T::zero()) || !(l > T::zero()) || !(t > T::zero()) {
        return Err(domain!("I(t) requires k > -1, b > 0, l > 0, t > 0 (k={k:e}, b={b:e}, l={l:e}, t={t:e})"));
    }
    let log_a = b.ln() + T::lit(n as f64 / 2.0) * t.ln();
    let f = move |s: T| {
        if s <= T::zero() {
            return T::zero();
        }
        (k * s.ln() - l * log1pexp(log_a + s)).exp()
    };
    let layer = (-log_a).max(T::one());
    let integrand = Integrand::new(f).power_at_zero(k).layer(layer).decay(Decay::Exponential { rate: l });
    let res = integrate_semi_infinite(&integrand, T::lit(1e-12), T::zero())?;
    Ok(res.scaled(t.powf(q)))
}

/// `J(t) = t^d int_0^inf r^c / (1 + b t^{n/2} exp(r^2 / 4 mu t))^l dr`, by
/// direct quadrature in `r`.
pub fn lemma2_j<T: Real>(d: T, c: T, b: T, l: T, n: usize, mu: T, t: T) -> Result<QuadResult<T>> {
    if !(c > -T::one()) || !(b > T::zero()) || !(l > T::zero()) || !(t > T::zero()) || !(mu > T::zero()) {
        return Err(domain!("J(t) requires c > -1, b, l, mu, t > 0 (c={c:e}, b={b:e}, l={l:e}, mu={mu:e}, t={t:e})"));
    }
    let four_mu_t = T::lit(4.0) * mu * t;
    let log_a = b.ln() + T::lit(n as f64 / 2.0) * t.ln();
    // integrate in x = r / layer and apply t^d layer^{c+1} in the log domain
    let layer = (four_mu_t * (-log_a).max(T::one())).sqrt();
    let xi_scale = layer * layer / four_mu_t;
    let f = move |x: T| {
        if x <= T::zero() {
            return T::zero();
        }
        (c * x.ln() - l * log1pexp(log_a + x * x * xi_scale)).exp()
    };
    let integrand =
        Integrand::new(f).power_at_zero(c).layer(T::one()).decay(Decay::Gaussian { length: xi_scale.sqrt().recip() });
    let res = integrate_semi_infinite(&integrand, T::lit(1e-12), T::zero())?;
    Ok(res.scaled((d * t.ln() + (c + T::one()) * layer.ln()).exp()))
}

/// `J(t)` through the substitution `s = r^2 / 4 mu t`:
/// `J = (4 mu)^{(c+1)/2} / 2 * I(t)` with `q = d + (c+1)/2`, `k = (c-1)/2`.
pub fn lemma2_j_via_i<T: Real>(d: T, c: T, b: T, l: T, n: usize, mu: T, t: T) -> Result<QuadResult<T>> {
    if !(mu > T::zero()) {
        return Err(domain!("J(t) requires mu > 0"));
    }
    let half = T::lit(0.5);
    let q = d + half * (c + T::one());
    let k = half * (c - T::one());
    let i = lemma1_i(q, k, b, l, n, t)?;
    Ok(i.scaled(half * (T::lit(4.0) * mu).powf(half * (c + T::one()))))
}
