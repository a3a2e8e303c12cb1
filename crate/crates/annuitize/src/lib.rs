//! Optimal annuitization of wealth under a one-shot mortality shock.
//!
//! An individual holds wealth in an index fund (a geometric Brownian motion)
//! and may, once and irreversibly, convert it into a life annuity. Their
//! mortality force jumps from `mu_l` to `mu_h` at an exponential time. The
//! crate provides:
//!
//! * [`core_model`]: parameters, validation and derived coefficients;
//! * [`constant_solver`]: the closed-form solution for a constant force;
//! * [`shock_solver`]: regime classification, implicit thresholds and the
//!   piecewise pre-shock value function;
//! * [`verify_oracles`]: quadrature, Monte Carlo and residual cross-checks;
//! * [`monte_carlo`]: path statistics of the threshold policies and life expectancy;
//! * [`sensitivity`]: parameter sweeps and crossing detection;
//! * [`cli`]: the `annuitize` command-line driver.

// Negated comparisons such as `!(x > 0.0)` are used on purpose so that NaN
// inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constant_solver;
pub mod core_model;
pub mod error;
pub mod monte_carlo;
pub mod piecewise;
pub mod quadrature;
pub mod roots;
pub mod sensitivity;
pub mod shock_solver;
pub mod verify_oracles;

pub use constant_solver::{solve_constant, ConstantRegime, ConstantSolution};
pub use core_model::{DerivedCoefficients, HealthState, ModelParams};
pub use error::{Error, Result};
pub use shock_solver::{solve_shock, ShockRegime, ShockSolution, StoppingRegion};
