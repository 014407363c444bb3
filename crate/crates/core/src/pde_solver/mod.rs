//! Deterministic equation `du/dt = a^{ij}(t) u_{x^i x^j} + f`: exact
//! multiplier evolution, Duhamel forcing, a Feynman–Kac Monte-Carlo oracle
//! and mollification.

mod evolve;
mod feynman_kac;
mod forcing;
mod mollify;

pub use evolve::{evolve_multiplier, solve_deterministic};
pub use feynman_kac::{feynman_kac_oracle, MonteCarloField, MIN_ORACLE_PATHS};
pub use forcing::Forcing;
pub use mollify::{mollifier_kernel, mollify};

pub(crate) use feynman_kac::representation_estimate;
