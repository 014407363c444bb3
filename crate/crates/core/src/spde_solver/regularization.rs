use serde::Serialize;

use crate::coefficient_model::CoefficientPath;
use crate::error::{LabError, Result};
use crate::regularity_harness::{weighted_time_sum, Derivative, SpatialNorm};
use crate::scalar::Real;
use crate::stochastic_drivers::WienerPath;

use super::solvers::{solve_full, SpdeData};

#[derive(Clone, Debug, Serialize)]
pub struct RegularizationEntry {
    pub eps: f64,
    /// `max_m ‖u_ε(t_m) - u(t_m)‖_{L_p}`.
    pub sup_error: f64,
    /// `(∫ ‖(u_ε)_xx‖^p_{L_p} δ_ε dt)^{1/p}`.
    pub weighted_hessian: f64,
    /// `∫ ε^p δ_ε^{1-p} ‖Δu_ε‖^p_{L_p} dt`.
    pub remainder: f64,
    /// `ε ∫ ‖Δu_ε‖^p_{L_p} dt`.
    pub remainder_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularizationReport {
    pub p: f64,
    pub entries: Vec<RegularizationEntry>,
    /// `sup_error` strictly decreases along the list.
    pub monotone: bool,
    /// `remainder <= remainder_bound` for every entry.
    pub remainder_bounded: bool,
}

/// Solves with `a + εI` for each `ε` (so `δ_ε = δ + ε`) and compares with the
/// unperturbed solution along the same Wiener path.
pub fn regularization_sweep<T: Real>(
    data: &SpdeData<T>,
    coeffs: &CoefficientPath<T>,
    w: &WienerPath<T>,
    eps_list: &[T],
    p: T,
) -> Result<RegularizationReport> {
    if eps_list.is_empty()
        || eps_list.windows(2).any(|e| !(e[1] < e[0]))
        || !(eps_list[eps_list.len() - 1] > T::zero())
    {
        return Err(LabError::InvalidParameter(
            "ε list must be positive and strictly decreasing".into(),
        ));
    }
    let base = solve_full(data, coeffs, w)?;
    let grid = data.grid();
    let value = SpatialNorm::new(grid, Derivative::Value, T::zero(), p)?;
    let hessian = SpatialNorm::new(grid, Derivative::Hessian, T::zero(), p)?;
    let laplacian = SpatialNorm::new(grid, Derivative::Laplacian, T::zero(), p)?;
    let time = coeffs.time();
    let mut entries = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let perturbed = coeffs.with_added_identity(eps)?;
        let u = solve_full(data, &perturbed, w)?;
        let mut sup_error = T::zero();
        for (a, b) in u.states().iter().zip(base.states()) {
            let mut diff = a.clone();
            diff.scale(-T::one());
            diff.add_assign(b);
            sup_error = sup_error.max(value.eval(&diff)?);
        }
        let hess: Vec<T> = u
            .states()
            .iter()
            .map(|s| hessian.eval_pow(s))
            .collect::<Result<_>>()?;
        let lap: Vec<T> = u
            .states()
            .iter()
            .map(|s| laplacian.eval_pow(s))
            .collect::<Result<_>>()?;
        let deltas = perturbed.deltas();
        let remainder_weights: Vec<T> = deltas
            .iter()
            .map(|&d| eps.powf(p) * d.powf(T::one() - p))
            .collect();
        let ones = vec![T::one(); deltas.len()];
        entries.push(RegularizationEntry {
            eps: eps.as_f64(),
            sup_error: sup_error.as_f64(),
            weighted_hessian: weighted_time_sum(time, &hess, &deltas)
                .powf(p.recip())
                .as_f64(),
            remainder: weighted_time_sum(time, &lap, &remainder_weights).as_f64(),
            remainder_bound: (eps * weighted_time_sum(time, &lap, &ones)).as_f64(),
        });
    }
    let monotone = entries.windows(2).all(|e| e[1].sup_error < e[0].sup_error);
    let remainder_bounded = entries
        .iter()
        .all(|e| e.remainder <= e.remainder_bound * (1.0 + 1e-12));
    Ok(RegularizationReport {
        p: p.as_f64(),
        entries,
        monotone,
        remainder_bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient_model::{Matrix, TimeGrid};
    use crate::pde_solver::Forcing;
    use crate::spectral_grid::{Grid, GridField};
    use crate::stochastic_drivers::sample_wiener;
    use std::f64::consts::TAU;

    #[test]
    fn elliptic_perturbation_is_linear_in_eps() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 8).unwrap();
        let c = CoefficientPath::constant(t, Matrix::diagonal(&[1.0]), Matrix::zeros(1, 1), "heat")
            .unwrap();
        let w = sample_wiener(1, c.time(), 0, 0).unwrap();
        let data = SpdeData::from_field(&GridField::from_fn(g, |x| x[0].sin()).unwrap());
        let r = regularization_sweep(&data, &c, &w, &[0.02, 0.01, 0.005], 2.0).unwrap();
        assert!(r.monotone && r.remainder_bounded);
        let ratio = r.entries[0].sup_error / r.entries[1].sup_error;
        assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn fully_degenerate_with_forcing() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 16).unwrap();
        let c =
            CoefficientPath::constant(t, Matrix::zeros(1, 1), Matrix::zeros(1, 1), "zero").unwrap();
        let w = sample_wiener(1, c.time(), 0, 0).unwrap();
        let data =
            SpdeData::from_field(&GridField::from_fn(g.clone(), |x| (2.0 * x[0]).cos()).unwrap())
                .with_f(Forcing::from_field(
                    &GridField::from_fn(g, |x| x[0].sin()).unwrap(),
                ));
        let r = regularization_sweep(&data, &c, &w, &[0.2, 0.1, 0.05, 0.025], 4.0).unwrap();
        assert!(r.monotone && r.remainder_bounded);
        assert!(r.entries[3].sup_error < 0.25 * r.entries[0].sup_error);
        assert!(regularization_sweep(&data, &c, &w, &[0.1, 0.2], 2.0).is_err());
    }
}
