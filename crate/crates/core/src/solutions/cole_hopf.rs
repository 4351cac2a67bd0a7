use std::fmt::Debug;
use std::sync::Arc;

use super::{check_radius, check_time, Asymptotics, Params, RadialJet, RadialSolution, Tail};
use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::specfun::sigmoid;

/// Logarithmic derivatives of a positive heat function:
/// `theta_r/theta`, `theta_rr/theta`, `theta_rrr/theta`, `theta_t/theta`, `theta_rt/theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogJet<T> {
    pub r1: T,
    pub r2: T,
    pub r3: T,
    pub t1: T,
    pub rt: T,
}

/// A positive radial solution of `theta_t = mu (theta_rr + (n-1) theta_r / r)`.
pub trait HeatFunction<T: Real>: Send + Sync + Debug {
    fn dimension(&self) -> usize;

    /// Viscosity the function was built for, if it depends on one.
    fn mu(&self) -> Option<T>;

    fn theta(&self, t: T, r: T) -> T;

    fn theta_r(&self, t: T, r: T) -> T;

    /// Closed-form log-derivatives; `None` makes the transform fall back to
    /// finite differences.
    fn log_jet(&self, _t: T, _r: T) -> Option<LogJet<T>> {
        None
    }

    /// Endpoint behaviour of the transformed profile `-2 mu theta_r / theta`.
    fn transformed_asymptotics(&self, t: T) -> Asymptotics<T>;
}

/// `theta = c > 0`; transforms to `u = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantHeat<T> {
    n: usize,
    c: T,
}

impl<T: Real> ConstantHeat<T> {
    pub fn new(n: usize, c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(domain!("constant heat function must be positive, got {c:e}"));
        }
        Ok(Self { n, c })
    }
}

impl<T: Real> HeatFunction<T> for ConstantHeat<T> {
    fn dimension(&self) -> usize {
        self.n
    }
    fn mu(&self) -> Option<T> {
        None
    }
    fn theta(&self, _t: T, _r: T) -> T {
        self.c
    }
    fn theta_r(&self, _t: T, _r: T) -> T {
        T::zero()
    }
    fn log_jet(&self, _t: T, _r: T) -> Option<LogJet<T>> {
        let z = T::zero();
        Some(LogJet { r1: z, r2: z, r3: z, t1: z, rt: z })
    }
    fn transformed_asymptotics(&self, _t: T) -> Asymptotics<T> {
        Asymptotics {
            origin_exponent: T::one(),
            origin_coefficient: T::zero(),
            origin_next_exponent: None,
            tail: Tail::Zero,
            tail_remainder: Some(Tail::Zero),
            pole: None,
            scale: T::one(),
        }
    }
}

/// `a + G_n(t, r)` with `G_n = (4 pi mu t)^{-n/2} exp(-r^2 / 4 mu t)`; `a = 0` is the bare kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetHeatKernel<T> {
    n: usize,
    mu: T,
    a: T,
    ln_a: T,
}

/// The heat kernel `G_n`; transforms to `u = r / t`.
pub type HeatKernel<T> = OffsetHeatKernel<T>;

impl<T: Real> OffsetHeatKernel<T> {
    pub fn new(n: usize, mu: T, a: T) -> Result<Self> {
        Params::new(n, mu).check_mu()?;
        if n < 1 {
            return Err(domain!("heat kernel needs n >= 1"));
        }
        if !(a >= T::zero()) || !a.is_finite() {
            return Err(domain!("offset must be non-negative so that theta > 0, got {a:e}"));
        }
        let ln_a = if a > T::zero() { a.ln() } else { T::neg_infinity() };
        Ok(Self { n, mu, a, ln_a })
    }

    pub fn kernel(n: usize, mu: T) -> Result<Self> {
        Self::new(n, mu, T::zero())
    }

    fn ln_kernel(&self, t: T, r: T) -> T {
        let half_n = T::lit(0.5) * T::of_usize(self.n);
        -half_n * (T::lit(4.0) * T::PI() * self.mu * t).ln() - r * r / (T::lit(4.0) * self.mu * t)
    }
}

impl<T: Real> HeatFunction<T> for OffsetHeatKernel<T> {
    fn dimension(&self) -> usize {
        self.n
    }
    fn mu(&self) -> Option<T> {
        Some(self.mu)
    }
    fn theta(&self, t: T, r: T) -> T {
        self.a + self.ln_kernel(t, r).exp()
    }
    fn theta_r(&self, t: T, r: T) -> T {
        -r / (T::lit(2.0) * self.mu * t) * self.ln_kernel(t, r).exp()
    }
    fn log_jet(&self, t: T, r: T) -> Option<LogJet<T>> {
        // G-derivatives over G, then scaled by G / (a + G).
        let g = sigmoid(self.ln_kernel(t, r) - self.ln_a);
        let beta = (T::lit(2.0) * self.mu * t).recip();
        let kappa = beta * r;
        let xi = r * r / (T::lit(4.0) * self.mu * t);
        let kt = (xi - T::lit(0.5) * T::of_usize(self.n)) / t;
        Some(LogJet {
            r1: -g * kappa,
            r2: g * (kappa * kappa - beta),
            r3: g * (T::lit(3.0) * beta * kappa - kappa * kappa * kappa),
            t1: g * kt,
            rt: g * (kappa / t - kappa * kt),
        })
    }
    fn transformed_asymptotics(&self, t: T) -> Asymptotics<T> {
        let width = (T::lit(4.0) * self.mu * t).sqrt();
        let ln_amp = self.ln_a + T::lit(0.5) * T::of_usize(self.n) * (T::lit(4.0) * T::PI() * self.mu * t).ln();
        let slope = sigmoid(-ln_amp) / t;
        let (tail, remainder) = if self.a > T::zero() {
            (Tail::Gaussian { length: width }, Tail::Gaussian { length: width })
        } else {
            (Tail::Power { exponent: T::one(), coefficient: t.recip() }, Tail::Zero)
        };
        Asymptotics {
            origin_exponent: T::one(),
            origin_coefficient: slope,
            origin_next_exponent: if self.a > T::zero() { Some(T::lit(3.0)) } else { None },
            tail,
            tail_remainder: Some(remainder),
            pole: None,
            scale: (-ln_amp).max(T::one()).sqrt() * width,
        }
    }
}

/// `u = -2 mu theta_r / theta`.
///
/// Derivatives come from the heat function's log-derivatives when it supplies
/// them and otherwise from five-point central differences with relative step
/// [`ColeHopf::fd_step`].
#[derive(Debug, Clone)]
pub struct ColeHopf<T: Real> {
    theta: Arc<dyn HeatFunction<T>>,
    mu: T,
    fd_step: T,
}

impl<T: Real> ColeHopf<T> {
    pub fn new(theta: Arc<dyn HeatFunction<T>>, mu: T) -> Result<Self> {
        let n = theta.dimension();
        Params::new(n, mu).check_mu()?;
        if let Some(m) = theta.mu() {
            if (m - mu).abs() > T::lit(64.0) * T::epsilon() * mu {
                return Err(domain!("heat function was built for mu = {m:e}, transform requested with {mu:e}"));
            }
        }
        Ok(Self { theta, mu, fd_step: T::lit(1e-3) })
    }

    pub fn with_fd_step(mut self, step: T) -> Self {
        self.fd_step = step;
        self
    }

    pub fn fd_step(&self) -> T {
        self.fd_step
    }

    pub fn heat_function(&self) -> &Arc<dyn HeatFunction<T>> {
        &self.theta
    }

    /// Transform evaluated directly from `theta` and `theta_r`, extended oddly to `r < 0`.
    fn direct(&self, t: T, r: T) -> Result<T> {
        let (sign, r) = if r < T::zero() { (-T::one(), -r) } else { (T::one(), r) };
        let th = self.theta.theta(t, r);
        if !(th > T::zero()) || !th.is_finite() {
            return Err(domain!("heat function is not positive at (t, r) = ({t:e}, {r:e}): {th:e}"));
        }
        Ok(sign * T::lit(-2.0) * self.mu * self.theta.theta_r(t, r) / th)
    }

    fn fd_jet(&self, t: T, r: T) -> Result<RadialJet<T>> {
        let scale = self.theta.transformed_asymptotics(t).scale;
        let h = self.fd_step * r.max(scale);
        let u0 = self.direct(t, r)?;
        let up1 = self.direct(t, r + h)?;
        let up2 = self.direct(t, r + h + h)?;
        let um1 = self.direct(t, r - h)?;
        let um2 = self.direct(t, r - h - h)?;
        let ht = self.fd_step * t;
        let tp1 = self.direct(t + ht, r)?;
        let tp2 = self.direct(t + ht + ht, r)?;
        let tm1 = self.direct(t - ht, r)?;
        let tm2 = self.direct(t - ht - ht, r)?;
        let eight = T::lit(8.0);
        let twelve = T::lit(12.0);
        Ok(RadialJet {
            u: u0,
            u_r: (um2 - up2 + eight * (up1 - um1)) / (twelve * h),
            u_rr: (-up2 + T::lit(16.0) * (up1 + um1) - T::lit(30.0) * u0 - um2) / (twelve * h * h),
            u_t: (tm2 - tp2 + eight * (tp1 - tm1)) / (twelve * ht),
        })
    }
}

impl<T: Real> RadialSolution<T> for ColeHopf<T> {
    fn params(&self) -> Params<T> {
        Params::new(self.theta.dimension(), self.mu)
    }

    fn origin_regular(&self) -> bool {
        true
    }

    fn u(&self, t: T, r: T) -> Result<T> {
        check_time(t)?;
        check_radius(r)?;
        match self.theta.log_jet(t, r) {
            Some(j) => Ok(T::lit(-2.0) * self.mu * j.r1),
            None => self.direct(t, r),
        }
    }

    fn jet(&self, t: T, r: T) -> Result<RadialJet<T>> {
        check_time(t)?;
        check_radius(r)?;
        let Some(j) = self.theta.log_jet(t, r) else {
            return self.fd_jet(t, r);
        };
        let m2 = T::lit(-2.0) * self.mu;
        Ok(RadialJet {
            u: m2 * j.r1,
            u_r: m2 * (j.r2 - j.r1 * j.r1),
            u_rr: m2 * (j.r3 - T::lit(3.0) * j.r1 * j.r2 + T::lit(2.0) * j.r1 * j.r1 * j.r1),
            u_t: m2 * (j.rt - j.r1 * j.t1),
        })
    }

    fn origin_slope(&self, t: T) -> Result<T> {
        check_time(t)?;
        if let Some(j) = self.theta.log_jet(t, T::zero()) {
            return Ok(T::lit(-2.0) * self.mu * j.r2);
        }
        // u = s r + c r^3 + ...: eliminate c between two radii.
        let h = self.fd_step * self.theta.transformed_asymptotics(t).scale;
        let q1 = self.direct(t, h)? / h;
        let q2 = self.direct(t, h + h)? / (h + h);
        Ok((T::lit(4.0) * q1 - q2) / T::lit(3.0))
    }

    fn asymptotics(&self, t: T) -> Asymptotics<T> {
        self.theta.transformed_asymptotics(t)
    }
}
