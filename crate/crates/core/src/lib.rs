//! Gradient clipping under heavy-tailed noise: noise models, test problems,
//! clipping operators, optimizers, diagnostics and an experiment harness.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod clip;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod noise;
pub mod optim;
pub mod problems;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use rng::{Seed, SimRng};
pub use scalar::Scalar;

pub type QuadraticProblem64 = problems::QuadraticProblem<f64>;
pub type NonconvexProblem64 = problems::NonconvexProblem<f64>;
pub type ChainInstance64 = problems::ChainInstance<f64>;
pub type LowerBoundInstance64 = problems::LowerBoundInstance<f64>;
pub type Domain64 = problems::Domain<f64>;
pub type Schedule64 = optim::Schedule<f64>;
pub type ACClipState64 = clip::ACClipState<f64>;
pub type QuadraticProblem32 = problems::QuadraticProblem<f32>;
pub type Schedule32 = optim::Schedule<f32>;
