//! Multi-parameter Tikhonov regularization for linear inverse problems.
//!
//! The crate solves `min_x ‖Kx - y^δ‖² + Σ η_i ψ_i(x)` for several convex
//! penalty combinations, studies the value function `F(η) = inf_x J_η(x)`,
//! and chooses the parameter vector `η` automatically by either the
//! discrepancy principle or the value-function balancing principle with two
//! fixed-point algorithms. An experiment harness reproduces three benchmark
//! inverse problems end to end and emits the error tables, rule traces and
//! criterion landscapes.
//!
//! All numerics are generic over the scalar type via [`Scalar`] (`f32` or
//! `f64`); the `*64` aliases below fix the default working precision.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod matio;
pub mod model;
pub mod operators;
pub mod penalties;
pub mod rng;
pub mod rules;
pub mod scalar;
pub mod solver;
pub mod value_function;

pub use error::CoreError;
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Operator64 = operators::LinearOperator<f64>;
pub type Penalty64 = penalties::Penalty<f64>;
pub type Model64 = model::TikhonovModel<f64>;
pub type RegParam64 = value_function::RegParam<f64>;
pub type SolveRecord64 = solver::SolveRecord<f64>;
pub type Problem64 = harness::Problem<f64>;
pub type Error64 = error::CoreError<f64>;
