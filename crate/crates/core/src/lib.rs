//! Spectral laboratory for degenerate linear SPDEs
//!
//! ```text
//! du = (a^{ij}(t) u_{x^i x^j} + f) dt + (σ^{ik}(t) u_{x^i} + g^k) dw^k_t
//! ```
//!
//! with coefficients depending only on `(ω, t)`. Every Fourier mode evolves
//! independently, so the solvers are exact per mode for piecewise-constant
//! data; Monte-Carlo representations and an Euler–Maruyama scheme serve as
//! independent oracles. The harness measures the weighted `L_p` regularity
//! estimates on families of degenerate and unbounded coefficients.
//!
//! The numerical core is generic over [`Real`] (`f32` / `f64`); the aliases
//! below fix `f64`, which the experiment harness uses throughout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficient_model;
pub mod error;
pub mod littlewood_paley;
pub mod pde_solver;
pub mod regularity_harness;
pub mod scalar;
pub mod spde_solver;
pub mod spectral_grid;
pub mod stochastic_drivers;

pub use error::{LabError, Result};
pub use scalar::Real;

pub type Grid64 = spectral_grid::Grid<f64>;
pub type Field64 = spectral_grid::GridField<f64>;
pub type Spectrum64 = spectral_grid::Spectrum<f64>;
pub type TimeGrid64 = coefficient_model::TimeGrid<f64>;
pub type CoefficientPath64 = coefficient_model::CoefficientPath<f64>;
pub type WienerPath64 = stochastic_drivers::WienerPath<f64>;
pub type Trajectory64 = spde_solver::Trajectory<f64>;

pub type Grid32 = spectral_grid::Grid<f32>;
pub type Field32 = spectral_grid::GridField<f32>;
pub type Spectrum32 = spectral_grid::Spectrum<f32>;
