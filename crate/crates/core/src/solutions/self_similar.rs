use super::{check_radius, check_time, Asymptotics, Params, RadialJet, RadialSolution, Tail};
use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::specfun::{logaddexp, upper_tail_integral_scaled};

/// `u(t, r) = (4 mu)^{n/2} t^{n/2-1} r^{1-n} e^{-xi} / (a + G_n(xi))`, `xi = r^2/(4 mu t)`,
/// with `G_n(z) = int_z^inf s^{-n/2} e^{-s} ds`.
///
/// Written as `u = (r/t) psi(xi)` with
/// `psi = xi^{-n/2} / (a e^xi + e^xi G_n(xi))`, evaluated in log form. The
/// profile depends on `(t, r)` only through `r / sqrt(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilar<T> {
    p: Params<T>,
    ln_a: T,
}

impl<T: Real> SelfSimilar<T> {
    pub fn new(p: Params<T>) -> Result<Self> {
        p.check_mu()?;
        if p.n < 3 {
            return Err(domain!("self-similar family needs n >= 3, got {}", p.n));
        }
        if !(p.a > T::zero()) || !p.a.is_finite() {
            return Err(domain!("self-similar family needs a > 0, got {:e}", p.a));
        }
        Ok(Self { p, ln_a: p.a.ln() })
    }

    /// `psi(xi)` and `psi'(xi) / psi(xi)`.
    fn profile(&self, xi: T) -> Result<(T, T)> {
        let half_n = T::lit(0.5) * T::of_usize(self.p.n);
        let ln_s = upper_tail_integral_scaled(self.p.n, xi)?.ln();
        let psi = (-half_n * xi.ln() - logaddexp(self.ln_a + xi, ln_s)).exp();
        Ok((psi, psi - T::one() - half_n / xi))
    }

    fn check(&self, t: T, r: T) -> Result<T> {
        check_time(t)?;
        check_radius(r)?;
        if r == T::zero() {
            return Err(Error::Singular("self-similar profile behaves like 1/r at r = 0".into()));
        }
        Ok(r * r / (T::lit(4.0) * self.p.mu * t))
    }
}

impl<T: Real> RadialSolution<T> for SelfSimilar<T> {
    fn params(&self) -> Params<T> {
        self.p
    }

    fn origin_regular(&self) -> bool {
        false
    }

    fn u(&self, t: T, r: T) -> Result<T> {
        let xi = self.check(t, r)?;
        Ok(r / t * self.profile(xi)?.0)
    }

    fn jet(&self, t: T, r: T) -> Result<RadialJet<T>> {
        let xi = self.check(t, r)?;
        let (psi, d) = self.profile(xi)?;
        let half_n = T::lit(0.5) * T::of_usize(self.p.n);
        let two = T::lit(2.0);
        // psi' = psi d, psi'' = psi (d^2 + psi d + n / (2 xi^2))
        let dd = d * d + psi * d + half_n / (xi * xi);
        Ok(RadialJet {
            u: r / t * psi,
            u_r: psi / t * (T::one() + two * xi * d),
            u_rr: two * xi * psi / (r * t) * (T::lit(3.0) * d + two * xi * dd),
            u_t: -(r / (t * t)) * psi * (T::one() + xi * d),
        })
    }

    fn asymptotics(&self, t: T) -> Asymptotics<T> {
        let width = (T::lit(4.0) * self.p.mu * t).sqrt();
        Asymptotics {
            origin_exponent: -T::one(),
            origin_coefficient: T::lit(2.0) * self.p.mu * T::of_usize(self.p.n - 2),
            origin_next_exponent: Some(T::zero()),
            tail: Tail::Gaussian { length: width },
            tail_remainder: Some(Tail::Gaussian { length: width }),
            pole: None,
            scale: width,
        }
    }
}
