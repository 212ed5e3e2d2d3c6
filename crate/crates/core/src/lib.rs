//! Stochastic approximation solvers for variational inequalities whose map is
//! the component-wise CVaR of random costs.
//!
//! The numerical core is generic over the scalar type through [`Real`]; the
//! aliases at the bottom of this file fix it to `f64`, which is what the
//! experiment harness uses.

// `!(a <= b)` style tests are kept so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod analysis;
pub mod cvar;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod problems;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type RiskLevel = cvar::RiskLevel<f64>;
pub type SampleBatch = cvar::SampleBatch<f64>;
pub type Matrix = linalg::Matrix<f64>;
pub type FeasibleSet = geometry::FeasibleSet<f64>;
pub type SubspaceProjector = geometry::SubspaceProjector<f64>;
pub type Problem = problems::StochasticViProblem<f64>;
pub type RoutingNetwork = problems::RoutingNetwork<f64>;
pub type AlgorithmConfig = algorithms::AlgorithmConfig<f64>;
pub type RunTrace = algorithms::RunTrace<f64>;
pub type KktPoint = analysis::KktPoint<f64>;
pub type KktResidual = analysis::KktResidual<f64>;

pub type Problem32 = problems::StochasticViProblem<f32>;
pub type AlgorithmConfig32 = algorithms::AlgorithmConfig<f32>;
pub type RunTrace32 = algorithms::RunTrace<f32>;
