//! Piecewise-constant random coefficients `a(t)`, `σ(t)`, the matrix
//! `α = a - ½σσᵀ`, its smallest eigenvalue `δ(t)` and the time weights built
//! from them.

mod family;
pub mod matrix;
mod path;
mod time_grid;

pub use family::{sample_path, CoefficientFamily};
pub use matrix::{
    psd_projection, smallest_eigenvalue, symmetric_eigen, symmetric_sqrt, Matrix, SymmetricEigen,
};
pub use path::{
    weight_value, weighted_contribution, AssumptionReport, CoefficientPath, CoefficientPathFile,
    DriftChoice, WeightKind,
};
pub use time_grid::TimeGrid;
