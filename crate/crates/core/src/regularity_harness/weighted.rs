use serde::Serialize;

use crate::coefficient_model::{weight_value, weighted_contribution, CoefficientPath, WeightKind};
use crate::error::{LabError, Result};
use crate::pde_solver::Forcing;
use crate::scalar::Real;
use crate::spde_solver::Trajectory;

use super::norms::{weighted_time_sum, Derivative, SpatialNorm};

/// `‖D u‖_{ℍ^γ_p(T, w)} = (E ∫_0^T ‖D u(t)‖^p_{H^γ_p} w(t) dt)^{1/p}` with the
/// left-point rule on the trajectory's grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedNormSpec {
    pub gamma: f64,
    pub p: f64,
    pub weight: WeightKind,
    pub derivative: Derivative,
}

impl WeightedNormSpec {
    pub fn new(gamma: f64, p: f64, weight: WeightKind, derivative: Derivative) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "p must be ≥ 2, got {p}"
            )));
        }
        if !gamma.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "γ must be finite, got {gamma}"
            )));
        }
        Ok(Self {
            gamma,
            p,
            weight,
            derivative,
        })
    }

    pub fn spatial<T: Real>(&self, grid: &crate::spectral_grid::Grid<T>) -> Result<SpatialNorm<T>> {
        SpatialNorm::new(grid, self.derivative, T::lit(self.gamma), T::lit(self.p))
    }
}

/// Monte-Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McValue {
    pub value: f64,
    pub stderr: f64,
}

impl McValue {
    /// Mean of per-path samples, summed in index order.
    pub fn mean_of(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        if samples.iter().any(|s| s.is_infinite()) {
            return Self {
                value: f64::INFINITY,
                stderr: f64::NAN,
            };
        }
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }

    /// `x -> x^{1/p}` with the delta-method error.
    pub fn root(self, p: f64) -> Self {
        if self.value == 0.0 {
            return Self {
                value: 0.0,
                stderr: 0.0,
            };
        }
        let value = self.value.powf(p.recip());
        Self {
            value,
            stderr: self.stderr * value / (p * self.value),
        }
    }
}

/// Per-interval weights of a coefficient path.
pub fn interval_weights<T: Real>(
    coeffs: &CoefficientPath<T>,
    kind: WeightKind,
    p: T,
) -> Result<Vec<T>> {
    (0..coeffs.intervals())
        .map(|m| coeffs.weight(kind, p, m))
        .collect()
}

/// `∫_0^T ‖D u(t)‖^p_{H^γ_p} w(t) dt` for one path.
pub fn path_weighted_integral<T: Real>(
    traj: &Trajectory<T>,
    coeffs: &CoefficientPath<T>,
    norm: &SpatialNorm<T>,
    weight: WeightKind,
) -> Result<T> {
    if !traj.time().same_as(coeffs.time()) {
        return Err(LabError::TimeGrid(
            "trajectory and coefficients use different grids".into(),
        ));
    }
    let weights = interval_weights(coeffs, weight, norm.p())?;
    let m = traj.time().intervals();
    let mut values = Vec::with_capacity(m);
    for (s, &w) in traj.states()[..m].iter().zip(&weights) {
        values.push(if w == T::zero() {
            T::zero()
        } else {
            norm.eval_pow(s)?
        });
    }
    Ok(weighted_time_sum(traj.time(), &values, &weights))
}

/// `max_m ‖u(t_m)‖^p_{H^γ_p}` for one path.
pub fn path_sup<T: Real>(traj: &Trajectory<T>, norm: &SpatialNorm<T>) -> Result<T> {
    traj.states()
        .iter()
        .try_fold(T::zero(), |acc, s| Ok(acc.max(norm.eval_pow(s)?)))
}

/// `∫_0^T ‖D f(t)‖^p w(t) dt` for piecewise-constant forcing (exact).
pub fn forcing_weighted_integral<T: Real>(
    forcing: &Forcing<T>,
    coeffs: &CoefficientPath<T>,
    norm: &SpatialNorm<T>,
    weight: WeightKind,
) -> Result<T> {
    if forcing.is_zero() {
        return Ok(T::zero());
    }
    let time = coeffs.time();
    let separable = forcing.separable();
    let base_pow = match separable {
        Some((base, _)) => Some(norm.eval_pow(base)?),
        None => None,
    };
    let mut total = T::zero();
    for m in 0..time.intervals() {
        let w = weight_value(weight, norm.p(), coeffs.delta(m), coeffs.sigma_sup(m))?;
        if forcing.vanishes_on(m) {
            continue;
        }
        let value = match (separable, base_pow) {
            (Some((_, None)), Some(b)) => b,
            (Some((_, Some(scale))), Some(b)) => scale[m].abs().powf(norm.p()) * b,
            _ => norm.eval_pow(&forcing.spectrum_at(m).expect("nonzero forcing"))?,
        };
        total = total + weighted_contribution(w, value * time.dt(m));
    }
    Ok(total)
}

/// `‖D u‖_{ℍ^γ_p(T, w)}` over a set of trajectories, each paired with its own
/// coefficient path (or one path shared by all).
pub fn weighted_spacetime_norm<T: Real>(
    trajs: &[Trajectory<T>],
    coeffs: &[CoefficientPath<T>],
    spec: &WeightedNormSpec,
) -> Result<McValue> {
    if trajs.is_empty() {
        return Err(LabError::InvalidParameter("empty trajectory set".into()));
    }
    if coeffs.len() != 1 && coeffs.len() != trajs.len() {
        return Err(LabError::Shape(
            "need one coefficient path, or one per trajectory".into(),
        ));
    }
    let norm = spec.spatial(trajs[0].state(0).grid())?;
    let samples = trajs
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let c = &coeffs[if coeffs.len() == 1 { 0 } else { i }];
            path_weighted_integral(t, c, &norm, spec.weight).map(|v| v.as_f64())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(McValue::mean_of(&samples).root(spec.p))
}

/// `E max_m ‖u(t_m)‖^p_{H^γ_p}`.
pub fn sup_norm_expectation<T: Real>(
    trajs: &[Trajectory<T>],
    gamma: f64,
    p: f64,
) -> Result<McValue> {
    if trajs.is_empty() {
        return Err(LabError::InvalidParameter("empty trajectory set".into()));
    }
    let norm = SpatialNorm::new(
        trajs[0].state(0).grid(),
        Derivative::Value,
        T::lit(gamma),
        T::lit(p),
    )?;
    let samples = trajs
        .iter()
        .map(|t| path_sup(t, &norm).map(|v| v.as_f64()))
        .collect::<Result<Vec<_>>>()?;
    Ok(McValue::mean_of(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient_model::{Matrix, TimeGrid};
    use crate::spde_solver::RealizationIds;
    use crate::spectral_grid::{Grid, GridField, Spectrum};
    use std::f64::consts::TAU;

    fn frozen(u: &Spectrum<f64>, time: &TimeGrid<f64>) -> Trajectory<f64> {
        Trajectory::new(
            time.clone(),
            vec![u.clone(); time.intervals() + 1],
            RealizationIds::default(),
        )
        .unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 4).unwrap();
        let c = CoefficientPath::constant(
            t.clone(),
            Matrix::diagonal(&[1.0]),
            Matrix::zeros(1, 1),
            "c",
        )
        .unwrap();
        let spec = WeightedNormSpec::new(0.0, 2.0, WeightKind::Delta, Derivative::Hessian).unwrap();
        let z = frozen(&Spectrum::zeros(g, 1), &t);
        assert_eq!(
            weighted_spacetime_norm(&[z], &[c], &spec).unwrap().value,
            0.0
        );
    }

    #[test]
    fn linear_weight_integrates_to_half() {
        // δ(t) = t sampled at interval midpoints; ‖u_xx‖_{L_2} = 1.
        let g = Grid::new(1, 16, TAU).unwrap();
        let m = 50;
        let t = TimeGrid::uniform(1.0, m).unwrap();
        let a: Vec<Matrix<f64>> = (0..m)
            .map(|i| Matrix::diagonal(&[(i as f64 + 0.5) / m as f64]))
            .collect();
        let c = CoefficientPath::noiseless(t.clone(), a, "linear").unwrap();
        let amp = (2.0 / TAU).sqrt();
        let u = GridField::from_fn(g, |x| amp * x[0].sin())
            .unwrap()
            .forward();
        let spec = WeightedNormSpec::new(0.0, 2.0, WeightKind::Delta, Derivative::Hessian).unwrap();
        let v = weighted_spacetime_norm(&[frozen(&u, &t)], &[c], &spec).unwrap();
        assert!((v.value.powi(2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn larger_weight_gives_larger_norm() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 4).unwrap();
        let c = CoefficientPath::constant(
            t.clone(),
            Matrix::diagonal(&[0.5]),
            Matrix::zeros(1, 1),
            "c",
        )
        .unwrap();
        let u = GridField::from_fn(g, |x| (2.0 * x[0]).cos())
            .unwrap()
            .forward();
        let tr = frozen(&u, &t);
        let lo = WeightedNormSpec::new(0.0, 4.0, WeightKind::Delta, Derivative::Value).unwrap();
        let hi = WeightedNormSpec::new(0.0, 4.0, WeightKind::DeltaPow1MinusP, Derivative::Value)
            .unwrap();
        let a = weighted_spacetime_norm(std::slice::from_ref(&tr), std::slice::from_ref(&c), &lo)
            .unwrap()
            .value;
        let b = weighted_spacetime_norm(&[tr], &[c], &hi).unwrap().value;
        assert!(a < b);
    }

    #[test]
    fn sup_of_constant_path() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 3).unwrap();
        let u = GridField::from_fn(g, |x| x[0].sin()).unwrap().forward();
        let v = sup_norm_expectation(&[frozen(&u, &t)], 0.0, 2.0).unwrap();
        assert!((v.value - TAU / 2.0).abs() < 1e-12);
        assert!(sup_norm_expectation::<f64>(&[], 0.0, 2.0).is_err());
    }
}
