use crate::coefficient_model::{
    smallest_eigenvalue, CoefficientPath, DriftChoice, Matrix, TimeGrid,
};
use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::stochastic_drivers::WienerPath;

use super::engine::{integrate, Problem};
use super::solvers::{ids, SpdeData};
use super::trajectory::Trajectory;

/// The clock `β(t) = ∫_0^t δ(s) ds` for piecewise-constant `δ > 0`, with its
/// inverse `ψ`.
#[derive(Clone, Debug)]
pub struct TimeChange<T: Real> {
    time: TimeGrid<T>,
    beta: TimeGrid<T>,
    deltas: Vec<T>,
}

impl<T: Real> TimeChange<T> {
    pub fn new(time: &TimeGrid<T>, deltas: Vec<T>) -> Result<Self> {
        if deltas.len() != time.intervals() {
            return Err(LabError::Shape("one δ per interval required".into()));
        }
        if let Some(m) = deltas
            .iter()
            .position(|&d| !(d > T::zero()) || !d.is_finite())
        {
            return Err(LabError::InvalidParameter(format!(
                "time change needs δ > 0, got δ={} on interval {m}",
                deltas[m]
            )));
        }
        let mut nodes = Vec::with_capacity(deltas.len() + 1);
        let mut acc = T::zero();
        nodes.push(acc);
        for (m, &d) in deltas.iter().enumerate() {
            acc = acc + d * time.dt(m);
            nodes.push(acc);
        }
        Ok(Self {
            time: time.clone(),
            beta: TimeGrid::new(nodes)?,
            deltas,
        })
    }

    /// Grid of the new clock: `β(t_m)`.
    pub fn clock(&self) -> &TimeGrid<T> {
        &self.beta
    }

    pub fn deltas(&self) -> &[T] {
        &self.deltas
    }

    pub fn beta(&self, t: T) -> T {
        let m = self.time.interval_of(t);
        self.beta.node(m) + self.deltas[m] * (t - self.time.node(m))
    }

    pub fn psi(&self, s: T) -> T {
        let m = self.beta.interval_of(s);
        self.time.node(m) + (s - self.beta.node(m)) / self.deltas[m]
    }
}

/// Additive equation solved on the `β` clock with `ã = A/δ`, `f̃ = f/δ`,
/// `g̃ = g/√δ` and `Δw̃ = √δ Δw`, then read back at the original nodes.
/// `δ` is the smallest eigenvalue of the chosen drift.
pub fn time_change_solve<T: Real>(
    data: &SpdeData<T>,
    coeffs: &CoefficientPath<T>,
    drift: DriftChoice,
    w: &WienerPath<T>,
) -> Result<Trajectory<T>> {
    let drift = coeffs.drift(drift)?;
    let deltas = drift
        .iter()
        .map(smallest_eigenvalue)
        .collect::<Result<Vec<_>>>()?;
    let change = TimeChange::new(coeffs.time(), deltas)?;
    if !w.time().same_as(coeffs.time()) {
        return Err(LabError::TimeGrid(
            "Wiener path and coefficients use different time grids".into(),
        ));
    }
    // Realized clock rates, so that each rescaling cancels the rounded clock step exactly.
    let deltas: Vec<T> = (0..coeffs.intervals())
        .map(|m| change.clock().dt(m) / coeffs.time().dt(m))
        .collect();
    let normalized: Vec<Matrix<T>> = drift
        .iter()
        .zip(&deltas)
        .map(|(a, &d)| a.scaled(d.recip()))
        .collect();
    let f = data
        .f
        .rescaled(&deltas.iter().map(|d| d.recip()).collect::<Vec<_>>());
    let g = data
        .g
        .rescaled(&deltas.iter().map(|d| d.sqrt().recip()).collect::<Vec<_>>());
    let mut increments = Vec::with_capacity(w.drivers() * deltas.len());
    for (m, d) in deltas.iter().enumerate() {
        increments.extend(w.increments_at(m).iter().map(|&x| x * d.sqrt()));
    }
    let w_new = WienerPath::from_increments(change.clock().clone(), w.drivers(), increments)?;
    let states = integrate(&Problem {
        u0: &data.u0,
        f: &f,
        g: &g,
        drift: &normalized,
        time: change.clock(),
        noise: Some(&w_new),
        shift: None,
    })?;
    Trajectory::new(coeffs.time().clone(), states, ids(coeffs, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_solver::Forcing;
    use crate::spde_solver::solve_additive;
    use crate::spectral_grid::{Grid, GridField};
    use crate::stochastic_drivers::sample_wiener;
    use std::f64::consts::TAU;

    #[test]
    fn clock_and_inverse() {
        let t = TimeGrid::uniform(1.0, 4).unwrap();
        let tc = TimeChange::new(&t, vec![0.5, 2.0, 2.0, 0.5]).unwrap();
        assert_eq!(tc.clock().horizon(), 1.25);
        for s in [0.0f64, 0.1, 0.3, 0.77, 1.25] {
            assert!((tc.beta(tc.psi(s)) - s).abs() < 1e-15);
        }
        assert!(TimeChange::new(&t, vec![0.5, 0.0, 1.0, 1.0]).is_err());
        let id = TimeChange::new(&t, vec![1.0; 4]).unwrap();
        assert!(id.clock().same_as(&t));
    }

    #[test]
    fn two_routes_agree() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 6).unwrap();
        let a: Vec<Matrix<f64>> = [0.5, 2.0, 0.5, 2.0, 2.0, 0.5]
            .iter()
            .map(|&x| Matrix::diagonal(&[x]))
            .collect();
        let c = CoefficientPath::new(t, a, vec![Matrix::zeros(1, 2); 6], "pc", 0).unwrap();
        let w = sample_wiener(2, c.time(), 3, 0).unwrap();
        let gk = GridField::stack(&[
            GridField::from_fn(g.clone(), |x| x[0].sin()).unwrap(),
            GridField::from_fn(g.clone(), |x| (3.0 * x[0]).cos()).unwrap(),
        ])
        .unwrap();
        let data =
            SpdeData::from_field(&GridField::from_fn(g.clone(), |x| (2.0 * x[0]).cos()).unwrap())
                .with_f(Forcing::from_field(
                    &GridField::from_fn(g, |x| x[0].cos()).unwrap(),
                ))
                .with_g(Forcing::from_field(&gk));
        let direct = solve_additive(&data, &c, DriftChoice::A, &w).unwrap();
        let changed = time_change_solve(&data, &c, DriftChoice::A, &w).unwrap();
        assert!(direct.max_abs_diff(&changed) < 1e-12);
    }
}
