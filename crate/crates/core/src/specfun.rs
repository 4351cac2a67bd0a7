//! Special functions and log-domain arithmetic.
//!
//! Everything here is pure and allocation free. The error function pair is a
//! generic port of the FreeBSD/Sun `s_erf.c` rational approximations; the upper
//! incomplete gamma values needed by the self-similar family only ever have
//! parameter `a = 1 - n/2`, so they are produced by a short downward recurrence
//! from `a = 1/2` (via `erfc`) or `a = 0` (via `E1`) for small arguments and by
//! a Lentz continued fraction for large ones.

use std::ops::{Add, Div, Mul};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::quadrature::{self, Decay, Integrand};
use crate::scalar::Real;

/// `log(1 + e^x)` without overflow or loss of precision.
#[inline]
pub fn log1pexp<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `log(e^a + e^b)`.
#[inline]
pub fn logaddexp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + log1pexp(lo - hi)
}

/// Logistic function `1 / (1 + e^{-x})`.
#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// A strictly positive quantity stored by its natural logarithm.
///
/// Products, quotients, powers and sums stay in log form, so quantities such as
/// `1 + a (4 pi mu t)^{n/2} exp(r^2 / 4 mu t)` can be formed for any `r`, `t`
/// without overflowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDomainValue<T> {
    log_magnitude: T,
}

impl<T: Real> LogDomainValue<T> {
    pub fn from_ln(log_magnitude: T) -> Self {
        Self { log_magnitude }
    }

    pub fn from_linear(x: T) -> Result<Self> {
        if !(x > T::zero()) || !x.is_finite() {
            return Err(domain!("log-domain value requires a positive finite number, got {x:e}"));
        }
        Ok(Self { log_magnitude: x.ln() })
    }

    pub fn one() -> Self {
        Self { log_magnitude: T::zero() }
    }

    #[inline]
    pub fn ln(self) -> T {
        self.log_magnitude
    }

    /// Whether the linear value is representable without overflow.
    pub fn is_finite(self) -> bool {
        self.log_magnitude.is_finite() && self.log_magnitude < T::max_value().ln()
    }

    /// Linear value, `None` if it would overflow.
    pub fn try_value(self) -> Option<T> {
        if self.is_finite() {
            Some(self.log_magnitude.exp())
        } else {
            None
        }
    }

    /// Linear value; saturates to `+inf` on overflow and to `0` on underflow.
    pub fn value(self) -> T {
        self.log_magnitude.exp()
    }

    pub fn powf(self, e: T) -> Self {
        Self { log_magnitude: self.log_magnitude * e }
    }

    pub fn recip(self) -> Self {
        Self { log_magnitude: -self.log_magnitude }
    }

    /// `1 + self`, the shape of every Cole–Hopf denominator in this crate.
    pub fn one_plus(self) -> Self {
        Self { log_magnitude: log1pexp(self.log_magnitude) }
    }
}

impl<T: Real> Mul for LogDomainValue<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self { log_magnitude: self.log_magnitude + rhs.log_magnitude }
    }
}

impl<T: Real> Div for LogDomainValue<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self { log_magnitude: self.log_magnitude - rhs.log_magnitude }
    }
}

impl<T: Real> Add for LogDomainValue<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { log_magnitude: logaddexp(self.log_magnitude, rhs.log_magnitude) }
    }
}

// Coefficients of the Sun Microsystems erf/erfc approximations (s_erf.c).
const ERX: f64 = 8.45062911510467529297e-01;
const EFX: f64 = 1.28379167095512586316e-01;
const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 5] = [
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];
const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 6] = [
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];
const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 8] = [
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];
const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 7] = [
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

/// Horner evaluation of `c[0] + c[1] x + ...` with `f64` coefficients.
#[inline]
fn poly<T: Real>(c: &[f64], x: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &ci| acc * x + T::lit(ci))
}

/// `1 + x (c[0] + c[1] x + ...)`.
#[inline]
fn poly1<T: Real>(c: &[f64], x: T) -> T {
    T::one() + x * poly(c, x)
}

/// `erf(x)/x - 1` style kernel on `|x| < 0.84375`: returns `x R(x^2)`.
#[inline]
fn erf_small_kernel<T: Real>(x: T) -> T {
    let z = x * x;
    x * (poly(&PP, z) / poly1(&QQ, z))
}

/// `P1/Q1` on `0.84375 <= |x| < 1.25`.
#[inline]
fn erf_mid_kernel<T: Real>(x: T) -> T {
    let s = x - T::one();
    poly(&PA, s) / poly1(&QA, s)
}

/// `x * erfc(x)` for `1.25 <= x < 28`, computed as `exp(-x^2 - 0.5625 + R/S)`.
fn erfc_tail_scaled<T: Real>(x: T) -> T {
    let s = T::one() / (x * x);
    let rs = if x < T::lit(1.0 / 0.35) { poly(&RA, s) / poly1(&SA, s) } else { poly(&RB, s) / poly1(&SB, s) };
    // -x^2 = -z^2 + (z - x)(z + x) with z carrying few enough bits that z^2 is exact.
    let scale = T::lit(4096.0);
    let z = (x * scale).round() / scale;
    (-z * z - T::lit(0.5625)).exp() * ((z - x) * (z + x) + rs).exp()
}

/// Error function `(2/sqrt(pi)) int_0^x e^{-s^2} ds`.
pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let r = if ax < T::lit(0.84375) {
        if ax < T::lit(3.7252902984619140625e-9) {
            ax + T::lit(EFX) * ax
        } else {
            ax + erf_small_kernel(ax)
        }
    } else if ax < T::lit(1.25) {
        T::lit(ERX) + erf_mid_kernel(ax)
    } else if ax >= T::lit(6.0) {
        T::one()
    } else {
        T::one() - erfc_tail_scaled(ax) / ax
    };
    if x < T::zero() {
        -r
    } else {
        r
    }
}

/// Complementary error function, evaluated directly for positive arguments so
/// that the result keeps full relative precision deep in the tail.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let two = T::lit(2.0);
    let ax = x.abs();
    let neg = x < T::zero();
    if ax < T::lit(0.84375) {
        let temp = if ax < T::lit(1.3877787807814457e-17) {
            ax
        } else if ax < T::lit(0.25) {
            ax + erf_small_kernel(ax)
        } else {
            // 1 - erf(x) = 0.5 - (x - 0.5 + x R)
            let r = erf_small_kernel(ax);
            let v = T::lit(0.5) - (r + (ax - T::lit(0.5)));
            return if neg { two - v } else { v };
        };
        return if neg { T::one() + temp } else { T::one() - temp };
    }
    if ax < T::lit(1.25) {
        let pq = erf_mid_kernel(ax);
        return if neg { T::one() + T::lit(ERX) + pq } else { T::one() - T::lit(ERX) - pq };
    }
    if ax < T::lit(28.0) {
        if neg && ax >= T::lit(6.0) {
            return two;
        }
        let r = erfc_tail_scaled(ax) / ax;
        return if neg { two - r } else { r };
    }
    if neg {
        two
    } else {
        T::zero()
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (Lanczos, g = 7).
pub fn gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::of_usize(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    (T::TAU()).sqrt() * t.powf(x + half) * (-t).exp() * acc
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::of_usize(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * T::TAU().ln() + (x + half) * t.ln() - t + acc.ln()
}

/// `Gamma(n/2)` for a positive integer `n`, by exact recurrence from
/// `Gamma(1/2) = sqrt(pi)` or `Gamma(1) = 1`.
pub fn gamma_half_integer<T: Real>(n: usize) -> T {
    assert!(n >= 1, "Gamma(n/2) needs n >= 1");
    let (mut value, mut a) = if n % 2 == 1 { (T::PI().sqrt(), T::lit(0.5)) } else { (T::one(), T::one()) };
    let target = T::lit(n as f64 / 2.0);
    while a < target {
        value = value * a;
        a = a + T::one();
    }
    value
}

/// Surface area `2 pi^{n/2} / Gamma(n/2)` of the unit sphere in `R^n`.
pub fn sphere_area<T: Real>(n: usize) -> T {
    T::lit(2.0) * T::PI().powf(T::lit(n as f64 / 2.0)) / gamma_half_integer::<T>(n)
}

/// Exponential integral `E1(z)` for `z > 0`.
pub fn exp_integral_e1<T: Real>(z: T) -> Result<T> {
    if !(z > T::zero()) {
        return Err(domain!("E1 requires z > 0, got {z:e}"));
    }
    if z <= T::lit(CF_SWITCH) {
        Ok(e1_series(z))
    } else {
        Ok(upper_gamma_scaled_cf(T::zero(), z) * (-z).exp())
    }
}

/// Power series `E1(z) = -gamma - ln z - sum (-z)^k / (k k!)`; used for `z <= 2`.
fn e1_series<T: Real>(z: T) -> T {
    let euler = T::lit(0.577_215_664_901_532_860_6);
    let mut sum = T::zero();
    let mut term = T::one();
    for k in 1..200 {
        let kf = T::of_usize(k);
        term = term * (-z) / kf;
        let contrib = term / kf;
        sum = sum + contrib;
        if contrib.abs() <= T::epsilon() * sum.abs() * T::lit(0.1) {
            break;
        }
    }
    -euler - z.ln() - sum
}

/// Argument above which the continued fraction replaces the recurrence.
///
/// The downward recurrence subtracts nearly equal quantities once `z` is large
/// compared with `|a|`, losing roughly a factor `z` per step.
const CF_SWITCH: f64 = 2.0;

/// `e^z Gamma(a, z)` by the modified Lentz continued fraction, `z > 1`.
fn upper_gamma_scaled_cf<T: Real>(a: T, z: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let eps = T::epsilon();
    let mut b = z + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..10_000 {
        let fi = T::of_usize(i);
        let an = -fi * (fi - a);
        b = b + T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() <= eps {
            break;
        }
    }
    z.powf(a) * h
}

fn check_tail_args<T: Real>(n: usize, z: T) -> Result<()> {
    if n < 2 {
        return Err(domain!("upper tail integral needs n >= 2, got n = {n}"));
    }
    if !(z > T::zero()) || z.is_nan() {
        return Err(domain!("upper tail integral diverges for z <= 0 (z = {z:e})"));
    }
    Ok(())
}

/// `e^z G_n(z)` where `G_n(z) = int_z^inf s^{-n/2} e^{-s} ds = Gamma(1 - n/2, z)`.
///
/// The scaled form stays representable for arguments where `G_n` itself
/// underflows; it behaves like `z^{-n/2}` for large `z`.
pub fn upper_tail_integral_scaled<T: Real>(n: usize, z: T) -> Result<T> {
    check_tail_args(n, z)?;
    let a_target = T::one() - T::lit(n as f64 / 2.0);
    if z > T::lit(CF_SWITCH) {
        return Ok(upper_gamma_scaled_cf(a_target, z));
    }
    // Seed at a = 1/2 (odd n) or a = 0 (even n) and recur downward:
    // S_{a-1} = (S_a - z^{a-1}) / (a - 1), with S_a = e^z Gamma(a, z).
    let (mut a, mut s) = if n % 2 == 1 {
        (T::lit(0.5), T::PI().sqrt() * erfc(z.sqrt()) * z.exp())
    } else {
        (T::zero(), e1_series(z) * z.exp())
    };
    while a > a_target {
        let am1 = a - T::one();
        s = (s - z.powf(am1)) / am1;
        a = am1;
    }
    Ok(s)
}

/// `G_n(z) = int_z^inf s^{-n/2} e^{-s} ds` for integer `n >= 2`, `z > 0`.
pub fn upper_tail_integral<T: Real>(n: usize, z: T) -> Result<T> {
    Ok(upper_tail_integral_scaled(n, z)? * (-z).exp())
}

/// Independent route to `e^z G_n(z)`: adaptive quadrature of
/// `int_0^inf (z + x)^{-n/2} e^{-x} dx`.
pub fn upper_tail_integral_scaled_quadrature<T: Real>(n: usize, z: T) -> Result<T> {
    check_tail_args(n, z)?;
    let e = T::lit(n as f64 / 2.0);
    let f = move |x: T| (z + x).powf(-e) * (-x).exp();
    let integrand = Integrand::new(f).layer(T::one()).decay(Decay::Exponential { rate: T::one() });
    let res = quadrature::integrate_semi_infinite(&integrand, T::lit(1e-13), T::zero())?;
    Ok(res.value)
}
