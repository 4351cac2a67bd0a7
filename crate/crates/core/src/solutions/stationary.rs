use super::{check_radius, Asymptotics, Params, RadialJet, RadialSolution, Tail};
use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Time-independent solutions
/// `u = 2 (n-2) mu / (r (1 + C r^{n-2}))` for `n >= 3` and
/// `u = -2 mu / (r (ln r + C))` for `n = 2`.
///
/// `n = 3, C = 0` is the profile `2 mu / r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationary<T> {
    p: Params<T>,
}

impl<T: Real> Stationary<T> {
    pub fn new(p: Params<T>) -> Result<Self> {
        p.check_mu()?;
        if p.n < 2 {
            return Err(domain!("stationary family needs n >= 2, got {}", p.n));
        }
        if !p.c.is_finite() {
            return Err(domain!("stationary constant must be finite, got {:e}", p.c));
        }
        Ok(Self { p })
    }

    /// Radius where the denominator vanishes, if it does for some `r > 0`.
    pub fn pole(&self) -> Option<T> {
        if self.p.n == 2 {
            return Some((-self.p.c).exp());
        }
        if self.p.c < T::zero() {
            let m = T::of_usize(self.p.n - 2);
            return Some((-self.p.c).recip().powf(m.recip()));
        }
        None
    }

    fn check(&self, t: T, r: T) -> Result<()> {
        if !t.is_finite() {
            return Err(domain!("time must be finite, got {t:e}"));
        }
        check_radius(r)?;
        if r == T::zero() {
            return Err(Error::Singular("stationary profile behaves like 1/r at r = 0".into()));
        }
        Ok(())
    }
}

impl<T: Real> RadialSolution<T> for Stationary<T> {
    fn params(&self) -> Params<T> {
        self.p
    }

    fn origin_regular(&self) -> bool {
        false
    }

    fn is_stationary(&self) -> bool {
        true
    }

    fn jet(&self, t: T, r: T) -> Result<RadialJet<T>> {
        self.check(t, r)?;
        let mu = self.p.mu;
        let two = T::lit(2.0);
        if self.p.n == 2 {
            let l = r.ln() + self.p.c;
            if l == T::zero() {
                return Err(Error::Singular(format!("stationary n = 2 profile has a pole at r = {r:e}")));
            }
            let rl = r * l;
            let l1 = l + T::one();
            return Ok(RadialJet {
                u: -two * mu / rl,
                u_r: two * mu * l1 / (rl * rl),
                u_rr: two * mu * (l - two * l1 * l1) / (rl * rl * rl),
                u_t: T::zero(),
            });
        }
        let m = T::of_usize(self.p.n - 2);
        let s = self.p.c * r.powf(m);
        let d = T::one() + s;
        if d == T::zero() {
            return Err(Error::Singular(format!("stationary profile has a pole at r = {r:e}")));
        }
        let k = two * m * mu;
        let m1 = m + T::one();
        let big_n = T::one() + m1 * s;
        let bracket = m * m1 * s * d - two * big_n * d - two * m * s * big_n;
        Ok(RadialJet {
            u: k / (r * d),
            u_r: -k * big_n / (r * r * d * d),
            u_rr: -k * bracket / (r * r * r * d * d * d),
            u_t: T::zero(),
        })
    }

    fn asymptotics(&self, _t: T) -> Asymptotics<T> {
        let mu = self.p.mu;
        let two = T::lit(2.0);
        if self.p.n == 2 {
            // Both ends carry a logarithm; the power parts are those of 1/r.
            return Asymptotics {
                origin_exponent: -T::one(),
                origin_coefficient: two * mu,
                origin_next_exponent: None,
                tail: Tail::Power { exponent: -T::one(), coefficient: -two * mu },
                tail_remainder: None,
                pole: self.pole(),
                scale: (-self.p.c).exp(),
            };
        }
        let m = T::of_usize(self.p.n - 2);
        let k = two * m * mu;
        if self.p.c == T::zero() {
            return Asymptotics {
                origin_exponent: -T::one(),
                origin_coefficient: k,
                origin_next_exponent: None,
                tail: Tail::Power { exponent: -T::one(), coefficient: k },
                tail_remainder: Some(Tail::Zero),
                pole: None,
                scale: T::one(),
            };
        }
        // k / (r (1 + C r^m)) = k/r - k C r^{m-1} + ...  near 0
        //                     = k/(C r^{m+1}) - k/(C^2 r^{2m+1}) + ...  at infinity
        let c = self.p.c;
        Asymptotics {
            origin_exponent: -T::one(),
            origin_coefficient: k,
            origin_next_exponent: Some(m - T::one()),
            tail: Tail::Power { exponent: -(m + T::one()), coefficient: k / c },
            tail_remainder: Some(Tail::Power { exponent: -(two * m + T::one()), coefficient: -k / (c * c) }),
            pole: self.pole(),
            scale: c.abs().recip().powf(m.recip()),
        }
    }
}
