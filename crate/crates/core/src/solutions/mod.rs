//! Closed-form radial solutions of the Cole system `u_t + (u . grad) u = mu Lap u`.
//!
//! Every family is a radial profile `u(t, r)`; the vector field is
//! `u_i(t, x) = (u(t, r) / r) x_i`. Evaluators return the profile together with
//! `u_r`, `u_rr` and `u_t` in a [`RadialJet`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

mod cole_hopf;
mod main_example;
mod nonstationary;
mod self_similar;
mod stationary;

pub use cole_hopf::{ColeHopf, ConstantHeat, HeatFunction, HeatKernel, LogJet, OffsetHeatKernel};
pub use main_example::MainExample;
pub use nonstationary::NonStationaryErf;
pub use self_similar::SelfSimilar;
pub use stationary::Stationary;

/// Family constants. `a` is used by the main example and the self-similar
/// family, `c` by the stationary family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    pub n: usize,
    pub mu: T,
    #[serde(default)]
    pub a: T,
    #[serde(default, alias = "C")]
    pub c: T,
}

impl<T: Real> Params<T> {
    pub fn new(n: usize, mu: T) -> Self {
        Self { n, mu, a: T::zero(), c: T::zero() }
    }

    pub fn with_a(mut self, a: T) -> Self {
        self.a = a;
        self
    }

    pub fn with_c(mut self, c: T) -> Self {
        self.c = c;
        self
    }

    fn check_mu(&self) -> Result<()> {
        if !(self.mu > T::zero()) || !self.mu.is_finite() {
            return Err(domain!("viscosity must be positive, got {:e}", self.mu));
        }
        Ok(())
    }
}

/// Profile value and partial derivatives at one `(t, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialJet<T> {
    pub u: T,
    pub u_r: T,
    pub u_rr: T,
    pub u_t: T,
}

/// The radial quotients entering the Cartesian derivatives:
/// `v = u / r`, `v_r / r` and `(1/r) d/dr (v_r / r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quotients<T> {
    pub v: T,
    pub v_r_over_r: T,
    pub third: T,
}

impl<T: Real> Quotients<T> {
    /// Quotients from a jet. Loses accuracy near `r = 0` for profiles that
    /// vanish there; origin-regular families override this.
    pub fn from_jet(r: T, j: &RadialJet<T>) -> Self {
        let r2 = r * r;
        let three = T::lit(3.0);
        Self {
            v: j.u / r,
            v_r_over_r: (r * j.u_r - j.u) / (r2 * r),
            third: j.u_rr / (r2 * r) - three * j.u_r / (r2 * r2) + three * j.u / (r2 * r2 * r),
        }
    }
}

/// Large-`r` behaviour of a profile at fixed `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Tail<T> {
    /// Decays at least like `exp(-(r / length)^2)`.
    Gaussian { length: T },
    /// `u ~ coefficient * r^exponent`.
    Power { exponent: T, coefficient: T },
    /// Identically zero.
    Zero,
}

/// Endpoint behaviour used to certify (non-)integrability before quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotics<T> {
    /// `u ~ coefficient * r^origin_exponent` as `r -> 0`.
    pub origin_exponent: T,
    pub origin_coefficient: T,
    /// Exponent of the next term of the expansion at the origin, `None` when
    /// the leading term is exact there. Logarithmic factors are ignored.
    pub origin_next_exponent: Option<T>,
    pub tail: Tail<T>,
    /// Behaviour of `u` minus its leading power tail; `None` if unknown.
    pub tail_remainder: Option<Tail<T>>,
    /// Radius where the profile has a pole, if any.
    pub pole: Option<T>,
    /// Natural length scale (boundary layer) of the profile.
    pub scale: T,
}

/// Common interface of all radial solution families.
pub trait RadialSolution<T: Real>: Send + Sync {
    fn params(&self) -> Params<T>;

    /// Whether `u(t, r) -> 0` as `r -> 0`, i.e. the vector field is regular at the origin.
    fn origin_regular(&self) -> bool;

    fn is_stationary(&self) -> bool {
        false
    }

    fn u(&self, t: T, r: T) -> Result<T> {
        Ok(self.jet(t, r)?.u)
    }

    fn jet(&self, t: T, r: T) -> Result<RadialJet<T>>;

    fn quotients(&self, t: T, r: T) -> Result<Quotients<T>> {
        if r == T::zero() {
            return Err(Error::Singular("radial quotients at r = 0".into()));
        }
        Ok(Quotients::from_jet(r, &self.jet(t, r)?))
    }

    /// `lim_{r->0} u(t, r) / r`; only meaningful for origin-regular families.
    fn origin_slope(&self, t: T) -> Result<T> {
        let _ = t;
        Err(Error::Singular("family is not regular at the origin".into()))
    }

    fn asymptotics(&self, t: T) -> Asymptotics<T>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    MainExample,
    SelfSimilar,
    Stationary,
    NonStationaryErf,
    ColeHopf,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::MainExample => "main-example",
            FamilyKind::SelfSimilar => "self-similar",
            FamilyKind::Stationary => "stationary",
            FamilyKind::NonStationaryErf => "nonstationary-erf",
            FamilyKind::ColeHopf => "cole-hopf",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "main-example" | "main" | "ubar" => FamilyKind::MainExample,
            "self-similar" | "ss" | "u-ss" => FamilyKind::SelfSimilar,
            "stationary" | "st" | "u-st" => FamilyKind::Stationary,
            "nonstationary-erf" | "nst" | "u-nst" | "erf" => FamilyKind::NonStationaryErf,
            "cole-hopf" => FamilyKind::ColeHopf,
            _ => return Err(Error::Config(format!("unknown family '{s}'"))),
        })
    }
}

/// Any of the shipped families behind one type.
#[derive(Debug, Clone)]
pub enum SolutionFamily<T: Real> {
    MainExample(MainExample<T>),
    SelfSimilar(SelfSimilar<T>),
    Stationary(Stationary<T>),
    NonStationaryErf(NonStationaryErf<T>),
    ColeHopf(ColeHopf<T>),
}

macro_rules! dispatch {
    ($self:ident, $s:ident => $body:expr) => {
        match $self {
            SolutionFamily::MainExample($s) => $body,
            SolutionFamily::SelfSimilar($s) => $body,
            SolutionFamily::Stationary($s) => $body,
            SolutionFamily::NonStationaryErf($s) => $body,
            SolutionFamily::ColeHopf($s) => $body,
        }
    };
}

impl<T: Real> SolutionFamily<T> {
    pub fn kind(&self) -> FamilyKind {
        match self {
            SolutionFamily::MainExample(_) => FamilyKind::MainExample,
            SolutionFamily::SelfSimilar(_) => FamilyKind::SelfSimilar,
            SolutionFamily::Stationary(_) => FamilyKind::Stationary,
            SolutionFamily::NonStationaryErf(_) => FamilyKind::NonStationaryErf,
            SolutionFamily::ColeHopf(_) => FamilyKind::ColeHopf,
        }
    }

    /// Builds a family from its kind and constants. Cole-Hopf families need a
    /// heat function and are built with [`cole_hopf`] instead.
    pub fn from_kind(kind: FamilyKind, p: Params<T>) -> Result<Self> {
        match kind {
            FamilyKind::MainExample => main_example(p),
            FamilyKind::SelfSimilar => self_similar(p),
            FamilyKind::Stationary => stationary(p),
            FamilyKind::NonStationaryErf => {
                if p.n != 3 {
                    return Err(domain!("the erf family exists only for n = 3, got n = {}", p.n));
                }
                nonstationary_erf(p.mu)
            }
            FamilyKind::ColeHopf => Err(Error::Config("cole-hopf families need a heat function".into())),
        }
    }

    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        let p = self.params();
        match self.kind() {
            FamilyKind::MainExample | FamilyKind::SelfSimilar => {
                format!("{}(n={}, mu={}, a={})", self.kind(), p.n, p.mu, p.a)
            }
            FamilyKind::Stationary => format!("stationary(n={}, mu={}, C={})", p.n, p.mu, p.c),
            _ => format!("{}(n={}, mu={})", self.kind(), p.n, p.mu),
        }
    }
}

impl<T: Real> RadialSolution<T> for SolutionFamily<T> {
    fn params(&self) -> Params<T> {
        dispatch!(self, s => s.params())
    }
    fn origin_regular(&self) -> bool {
        dispatch!(self, s => s.origin_regular())
    }
    fn is_stationary(&self) -> bool {
        dispatch!(self, s => s.is_stationary())
    }
    fn u(&self, t: T, r: T) -> Result<T> {
        dispatch!(self, s => s.u(t, r))
    }
    fn jet(&self, t: T, r: T) -> Result<RadialJet<T>> {
        dispatch!(self, s => s.jet(t, r))
    }
    fn quotients(&self, t: T, r: T) -> Result<Quotients<T>> {
        dispatch!(self, s => s.quotients(t, r))
    }
    fn origin_slope(&self, t: T) -> Result<T> {
        dispatch!(self, s => s.origin_slope(t))
    }
    fn asymptotics(&self, t: T) -> Asymptotics<T> {
        dispatch!(self, s => s.asymptotics(t))
    }
}

pub fn main_example<T: Real>(p: Params<T>) -> Result<SolutionFamily<T>> {
    Ok(SolutionFamily::MainExample(MainExample::new(p)?))
}

pub fn self_similar<T: Real>(p: Params<T>) -> Result<SolutionFamily<T>> {
    Ok(SolutionFamily::SelfSimilar(SelfSimilar::new(p)?))
}

pub fn stationary<T: Real>(p: Params<T>) -> Result<SolutionFamily<T>> {
    Ok(SolutionFamily::Stationary(Stationary::new(p)?))
}

pub fn nonstationary_erf<T: Real>(mu: T) -> Result<SolutionFamily<T>> {
    Ok(SolutionFamily::NonStationaryErf(NonStationaryErf::new(mu)?))
}

pub fn cole_hopf<T: Real>(theta: Arc<dyn HeatFunction<T>>, mu: T) -> Result<SolutionFamily<T>> {
    Ok(SolutionFamily::ColeHopf(ColeHopf::new(theta, mu)?))
}

pub(crate) fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(domain!("time must be positive, got {t:e}"));
    }
    Ok(())
}

pub(crate) fn check_radius<T: Real>(r: T) -> Result<()> {
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(domain!("radius must be non-negative, got {r:e}"));
    }
    Ok(())
}

/// Value, Jacobian `d_j u_i` and second partials `d_jk u_i` of the vector field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartesianComponents<T> {
    pub value: Vec<T>,
    /// `jacobian[i][j] = d_j u_i`.
    pub jacobian: Vec<Vec<T>>,
    /// `second_partials[i][j][k] = d_j d_k u_i`.
    pub second_partials: Vec<Vec<Vec<T>>>,
}

impl<T: Real> CartesianComponents<T> {
    /// Squared Frobenius norm of the Jacobian.
    pub fn frobenius_sq(&self) -> T {
        self.jacobian.iter().flat_map(|row| row.iter()).map(|&d| d * d).sum()
    }
}

/// Assembles the Cartesian field and its first and second spatial partials
/// at `x` from the radial closed forms.
pub fn cartesian_components<T: Real, S: RadialSolution<T> + ?Sized>(
    s: &S,
    t: T,
    x: &[T],
) -> Result<CartesianComponents<T>> {
    let n = s.params().n;
    if x.len() != n {
        return Err(domain!("point has dimension {} but the family has n = {n}", x.len()));
    }
    let r = x.iter().map(|&xi| xi * xi).sum::<T>().sqrt();
    let mut second = vec![vec![vec![T::zero(); n]; n]; n];
    let mut jacobian = vec![vec![T::zero(); n]; n];

    if r == T::zero() {
        if !s.origin_regular() {
            return Err(Error::Singular("Cartesian evaluation at x = 0 of a family singular at the origin".into()));
        }
        let slope = s.origin_slope(t)?;
        for (i, row) in jacobian.iter_mut().enumerate() {
            row[i] = slope;
        }
        return Ok(CartesianComponents { value: vec![T::zero(); n], jacobian, second_partials: second });
    }

    let q = s.quotients(t, r)?;
    let vr = q.v_r_over_r * r;
    let value = x.iter().map(|&xi| q.v * xi).collect();
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { q.v } else { T::zero() };
            jacobian[i][j] = vr * x[i] * x[j] / r + delta;
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut d = q.third * x[i] * x[j] * x[k];
                let mut lin = T::zero();
                if j == k {
                    lin = lin + x[i];
                }
                if i == k {
                    lin = lin + x[j];
                }
                if i == j {
                    lin = lin + x[k];
                }
                d = d + q.v_r_over_r * lin;
                second[i][j][k] = d;
                second[i][k][j] = d;
            }
        }
    }
    Ok(CartesianComponents { value, jacobian, second_partials: second })
}

/// Time derivative of the Cartesian field at `x`, `d_t u_i = (u_t / r) x_i`.
pub fn cartesian_time_derivative<T: Real, S: RadialSolution<T> + ?Sized>(s: &S, t: T, x: &[T]) -> Result<Vec<T>> {
    let r = x.iter().map(|&xi| xi * xi).sum::<T>().sqrt();
    if r == T::zero() {
        if !s.origin_regular() {
            return Err(Error::Singular("time derivative at x = 0 of a family singular at the origin".into()));
        }
        return Ok(vec![T::zero(); x.len()]);
    }
    let j = s.jet(t, r)?;
    Ok(x.iter().map(|&xi| j.u_t / r * xi).collect())
}
