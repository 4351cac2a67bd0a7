use super::{check_radius, check_time, Asymptotics, Params, Quotients, RadialJet, RadialSolution, Tail};
use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::specfun::sigmoid;

/// `u(t, r) = r / (t f)`, `f = 1 + a (4 pi mu t)^{n/2} exp(r^2 / 4 mu t)`.
///
/// With `L = ln a + (n/2) ln(4 pi mu t) + r^2/(4 mu t)` we have `1/f = sigmoid(-L)`,
/// so the profile never overflows however large the exponent gets.
/// `a = 0` is accepted as the degenerate profile `u = r / t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainExample<T> {
    p: Params<T>,
    ln_a: T,
}

struct Core<T> {
    /// `1 / f`
    g: T,
    /// `1 - 1/f`
    w: T,
    xi: T,
}

impl<T: Real> MainExample<T> {
    pub fn new(p: Params<T>) -> Result<Self> {
        p.check_mu()?;
        if p.n < 2 {
            return Err(domain!("main example needs n >= 2, got {}", p.n));
        }
        if !(p.a >= T::zero()) || !p.a.is_finite() {
            return Err(domain!("main example needs a >= 0, got {:e}", p.a));
        }
        let ln_a = if p.a > T::zero() { p.a.ln() } else { T::neg_infinity() };
        Ok(Self { p, ln_a })
    }

    /// `ln A(t)` with `A = a (4 pi mu t)^{n/2}`.
    pub fn ln_amplitude(&self, t: T) -> T {
        self.ln_a + T::lit(0.5) * T::of_usize(self.p.n) * (T::lit(4.0) * T::PI() * self.p.mu * t).ln()
    }

    fn core(&self, t: T, r: T) -> Core<T> {
        let xi = r * r / (T::lit(4.0) * self.p.mu * t);
        let l = self.ln_amplitude(t) + xi;
        Core { g: sigmoid(-l), w: sigmoid(l), xi }
    }
}

impl<T: Real> RadialSolution<T> for MainExample<T> {
    fn params(&self) -> Params<T> {
        self.p
    }

    fn origin_regular(&self) -> bool {
        true
    }

    fn u(&self, t: T, r: T) -> Result<T> {
        check_time(t)?;
        check_radius(r)?;
        Ok(r * self.core(t, r).g / t)
    }

    fn jet(&self, t: T, r: T) -> Result<RadialJet<T>> {
        check_time(t)?;
        check_radius(r)?;
        let Core { g, w, xi } = self.core(t, r);
        let one = T::one();
        let two = T::lit(2.0);
        let kappa = r / (two * self.p.mu * t);
        let half_n = T::lit(0.5) * T::of_usize(self.p.n);
        Ok(RadialJet {
            u: r * g / t,
            u_r: g / t * (one - two * xi * w),
            u_rr: -(g * w * kappa / t) * (T::lit(3.0) + two * xi * (g - w)),
            u_t: -(r * g / (t * t)) * (one + w * (half_n - xi)),
        })
    }

    fn quotients(&self, t: T, r: T) -> Result<Quotients<T>> {
        check_time(t)?;
        check_radius(r)?;
        let Core { g, w, .. } = self.core(t, r);
        let mu = self.p.mu;
        Ok(Quotients {
            v: g / t,
            v_r_over_r: -g * w / (T::lit(2.0) * mu * t * t),
            third: w * g * (w - g) / (T::lit(4.0) * mu * mu * t * t * t),
        })
    }

    fn origin_slope(&self, t: T) -> Result<T> {
        check_time(t)?;
        Ok(sigmoid(-self.ln_amplitude(t)) / t)
    }

    fn asymptotics(&self, t: T) -> Asymptotics<T> {
        let width = (T::lit(4.0) * self.p.mu * t).sqrt();
        let slope = sigmoid(-self.ln_amplitude(t)) / t;
        if self.p.a > T::zero() {
            let layer = (-self.ln_amplitude(t)).max(T::one()).sqrt() * width;
            Asymptotics {
                origin_exponent: T::one(),
                origin_coefficient: slope,
                origin_next_exponent: Some(T::lit(3.0)),
                tail: Tail::Gaussian { length: width },
                tail_remainder: Some(Tail::Gaussian { length: width }),
                pole: None,
                scale: layer,
            }
        } else {
            Asymptotics {
                origin_exponent: T::one(),
                origin_coefficient: slope,
                origin_next_exponent: None,
                tail: Tail::Power { exponent: T::one(), coefficient: T::one() / t },
                tail_remainder: Some(Tail::Zero),
                pole: None,
                scale: width,
            }
        }
    }
}
