//! Per-mode exact solvers for the additive and the full equation, the
//! time-change and `ε`-regularization reductions, and two oracles
//! (Euler–Maruyama and the Monte-Carlo representation).

pub(crate) mod engine;
mod regularization;
mod solvers;
mod time_change;
mod trajectory;

pub use regularization::{regularization_sweep, RegularizationEntry, RegularizationReport};
pub use solvers::{
    euler_maruyama_oracle, representation_oracle_spde, solve_additive, solve_full, SpdeData,
};
pub use time_change::{time_change_solve, TimeChange};
pub use trajectory::{RealizationIds, Trajectory};
