#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::suspicious_arithmetic_impl)]

pub mod error;
pub mod norms;
pub mod pdesolver;
pub mod quadrature;
pub mod residual;
pub mod scalar;
pub mod solutions;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Params64 = solutions::Params<f64>;
pub type SolutionFamily64 = solutions::SolutionFamily<f64>;
pub type MainExample64 = solutions::MainExample<f64>;
pub type SelfSimilar64 = solutions::SelfSimilar<f64>;
pub type Stationary64 = solutions::Stationary<f64>;
pub type NonStationaryErf64 = solutions::NonStationaryErf<f64>;
pub type ColeHopf64 = solutions::ColeHopf<f64>;
pub type SolverConfig64 = pdesolver::SolverConfig<f64>;

pub type Params32 = solutions::Params<f32>;
pub type SolutionFamily32 = solutions::SolutionFamily<f32>;
pub type MainExample32 = solutions::MainExample<f32>;
