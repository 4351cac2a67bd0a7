use super::{check_radius, check_time, Asymptotics, Params, Quotients, RadialJet, RadialSolution, Tail};
use crate::error::Result;
use crate::scalar::Real;
use crate::specfun::erf;

const TERMS: usize = 18;

/// Below this value of `y = r / sqrt(4 mu t)` the profile is summed as a power
/// series in `y^2`; above it the closed form has lost at most a few bits.
const SERIES_SWITCH: f64 = 0.5;

/// The `n = 3` solution
/// `u = 2 mu (1/r - exp(-r^2/4 mu t) / (sqrt(mu pi t) erf(r / sqrt(4 mu t))))`, `u(t, 0) = 0`.
///
/// In scaled form `u = sqrt(mu/t) h(y)` with `h(y) = 1/y - (2/sqrt(pi)) e^{-y^2} / erf(y)`.
/// The two terms of `h` cancel as `y -> 0`, so for small `y` we write
/// `h = y H(y^2)` and sum the Taylor series of `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonStationaryErf<T> {
    mu: T,
    /// Taylor coefficients of `H(z) = h(y) / y`, `z = y^2`.
    coeffs: [T; TERMS],
}

struct Scaled<T> {
    y: T,
    h: T,
    dh: T,
    d2h: T,
}

impl<T: Real> NonStationaryErf<T> {
    pub fn new(mu: T) -> Result<Self> {
        Params::new(3, mu).check_mu()?;
        Ok(Self { mu, coeffs: series_coefficients() })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    /// `H(z)`, `H'(z)`, `H''(z)` from the series.
    fn series(&self, z: T) -> (T, T, T) {
        let mut h = T::zero();
        let mut d1 = T::zero();
        let mut d2 = T::zero();
        for k in (0..TERMS).rev() {
            let kf = T::of_usize(k);
            h = h * z + self.coeffs[k];
            if k >= 1 {
                d1 = d1 * z + kf * self.coeffs[k];
            }
            if k >= 2 {
                d2 = d2 * z + kf * (kf - T::one()) * self.coeffs[k];
            }
        }
        (h, d1, d2)
    }

    fn scaled(&self, t: T, r: T) -> Scaled<T> {
        let y = r / (T::lit(4.0) * self.mu * t).sqrt();
        let two = T::lit(2.0);
        if y < T::lit(SERIES_SWITCH) {
            let z = y * y;
            let (h0, h1, h2) = self.series(z);
            return Scaled { y, h: y * h0, dh: h0 + two * z * h1, d2h: two * y * (T::lit(3.0) * h1 + two * z * h2) };
        }
        let p = two / T::PI().sqrt() * (-y * y).exp() / erf(y);
        let h = y.recip() - p;
        let dh = two - two * y * h - two * h / y + h * h;
        let d2h = -two * h - two * y * dh - two * (y * dh - h) / (y * y) + two * h * dh;
        Scaled { y, h, dh, d2h }
    }
}

/// Coefficients of `H = A / B` where, with `z = y^2`,
/// `A = sum_j (-1)^j 2(j+1) z^j / ((j+1)! (2j+3))` and
/// `B = sum_j (-1)^j z^j / (j! (2j+1))`.
fn series_coefficients<T: Real>() -> [T; TERMS] {
    let mut a = [0.0_f64; TERMS];
    let mut b = [0.0_f64; TERMS];
    let mut fact = 1.0_f64;
    for j in 0..TERMS {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let jf = j as f64;
        b[j] = sign / (fact * (2.0 * jf + 1.0));
        fact *= jf + 1.0;
        a[j] = sign * 2.0 * (jf + 1.0) / (fact * (2.0 * jf + 3.0));
    }
    let mut c = [0.0_f64; TERMS];
    for k in 0..TERMS {
        let mut s = a[k];
        for i in 0..k {
            s -= c[i] * b[k - i];
        }
        c[k] = s / b[0];
    }
    let mut out = [T::zero(); TERMS];
    for (o, v) in out.iter_mut().zip(c) {
        *o = T::lit(v);
    }
    out
}

impl<T: Real> RadialSolution<T> for NonStationaryErf<T> {
    fn params(&self) -> Params<T> {
        Params::new(3, self.mu)
    }

    fn origin_regular(&self) -> bool {
        true
    }

    fn jet(&self, t: T, r: T) -> Result<RadialJet<T>> {
        check_time(t)?;
        check_radius(r)?;
        let Scaled { y, h, dh, d2h } = self.scaled(t, r);
        let two = T::lit(2.0);
        let amp = (self.mu / t).sqrt();
        Ok(RadialJet {
            u: amp * h,
            u_r: dh / (two * t),
            u_rr: d2h / (two * t * (T::lit(4.0) * self.mu * t).sqrt()),
            u_t: -amp * (h + y * dh) / (two * t),
        })
    }

    fn quotients(&self, t: T, r: T) -> Result<Quotients<T>> {
        check_time(t)?;
        check_radius(r)?;
        let four_mu_t = T::lit(4.0) * self.mu * t;
        let z = r * r / four_mu_t;
        if z < T::lit(SERIES_SWITCH * SERIES_SWITCH) {
            let (h0, h1, h2) = self.series(z);
            let two = T::lit(2.0);
            return Ok(Quotients {
                v: h0 / (two * t),
                v_r_over_r: h1 / (two * self.mu * t * t) / two,
                third: h2 / (two * t) * T::lit(4.0) / (four_mu_t * four_mu_t),
            });
        }
        Ok(Quotients::from_jet(r, &self.jet(t, r)?))
    }

    fn origin_slope(&self, t: T) -> Result<T> {
        check_time(t)?;
        Ok(self.coeffs[0] / (T::lit(2.0) * t))
    }

    fn asymptotics(&self, t: T) -> Asymptotics<T> {
        let width = (T::lit(4.0) * self.mu * t).sqrt();
        Asymptotics {
            origin_exponent: T::one(),
            origin_coefficient: self.coeffs[0] / (T::lit(2.0) * t),
            origin_next_exponent: Some(T::lit(3.0)),
            tail: Tail::Power { exponent: -T::one(), coefficient: T::lit(2.0) * self.mu },
            tail_remainder: Some(Tail::Gaussian { length: width }),
            pole: None,
            scale: width,
        }
    }
}
