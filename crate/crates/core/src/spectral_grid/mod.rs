//! Periodic grids standing in for `R^d`, discrete Fourier transforms, Bessel
//! potentials, spectral derivatives and `L_p` / `H^γ_p` norms.

mod field;
mod grid;
pub mod io;
mod ops;
mod transform;

pub use field::{GridField, Spectrum};
pub use grid::{Grid, DEFAULT_POINT_BUDGET, MAX_DIM};
pub use ops::{
    bessel_potential, bessel_symbol, derivative, derivative_symbol, lp_norm, lp_norm_components,
    sobolev_norm, spectral_sobolev_norm, translation_symbol,
};
pub use transform::{forward_transform, inverse_transform};
