//! Wiener increments for the drivers `w^k`, the auxiliary diffusion `X'` of
//! the probabilistic representations and the shift process `x_t = ∫ σ dw`.

mod processes;
pub mod rng;
mod wiener;

pub use crate::coefficient_model::symmetric_sqrt;
pub use processes::{auxiliary_increments, shift_process, AuxiliaryDiffusion, PathPositions};
pub use wiener::{sample_wiener, sample_wiener_refined, WienerPath};
