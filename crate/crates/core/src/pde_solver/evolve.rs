use num_complex::Complex;

use crate::coefficient_model::{CoefficientPath, DriftChoice, Matrix};
use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::spde_solver::engine::{integrate, Problem};
use crate::spde_solver::{RealizationIds, Trajectory};
use crate::spectral_grid::Spectrum;

use super::Forcing;

/// `∫_s^t a(r) dr`, exact for piecewise-constant `a`.
fn integrated_matrix<T: Real>(coeffs: &CoefficientPath<T>, s: T, t: T) -> Matrix<T> {
    let time = coeffs.time();
    let mut acc = Matrix::zeros(coeffs.dim(), coeffs.dim());
    for m in 0..time.intervals() {
        let lo = time.node(m).max(s);
        let hi = time.node(m + 1).min(t);
        if hi > lo {
            acc = acc.add(&coeffs.a(m).scaled(hi - lo));
        }
    }
    acc
}

/// Multiplies each mode by `exp(-∫_s^t a^{ij}(r) ξ_i ξ_j dr)`.
pub fn evolve_multiplier<T: Real>(
    spectrum: &Spectrum<T>,
    coeffs: &CoefficientPath<T>,
    s: T,
    t: T,
) -> Result<Spectrum<T>> {
    if !(s <= t) || s < T::zero() || t > coeffs.time().horizon() {
        return Err(LabError::TimeGrid(format!(
            "need 0 <= s <= t <= T, got s={s}, t={t}"
        )));
    }
    if spectrum.grid().dim() != coeffs.dim() {
        return Err(LabError::Shape(
            "coefficients and grid disagree on d".into(),
        ));
    }
    let a = integrated_matrix(coeffs, s, t);
    let grid = spectrum.grid().clone();
    let d = grid.dim();
    Ok(spectrum.map_multiplier(|mode| {
        let q = a.quadratic_form(&grid.wavevector(mode)[..d]);
        Complex::new((-q).exp(), T::zero())
    }))
}

/// Duhamel solution on the coefficient time grid, exact for piecewise-constant
/// `f`.
pub fn solve_deterministic<T: Real>(
    u0: &Spectrum<T>,
    f: &Forcing<T>,
    coeffs: &CoefficientPath<T>,
) -> Result<Trajectory<T>> {
    let drift = coeffs.drift(DriftChoice::A)?;
    let zero = Forcing::zero();
    let states = integrate(&Problem {
        u0,
        f,
        g: &zero,
        drift: &drift,
        time: coeffs.time(),
        noise: None,
        shift: None,
    })?;
    let ids = RealizationIds {
        coefficient_seed: coeffs.seed(),
        ..Default::default()
    };
    Trajectory::new(coeffs.time().clone(), states, ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient_model::TimeGrid;
    use crate::spectral_grid::{lp_norm, Grid, GridField};
    use std::f64::consts::{PI, TAU};

    fn heat(d: usize, a: Matrix<f64>, intervals: usize) -> CoefficientPath<f64> {
        let t = TimeGrid::uniform(1.0, intervals).unwrap();
        CoefficientPath::constant(t, a, Matrix::zeros(d, 1), "heat").unwrap()
    }

    #[test]
    fn single_mode_decay() {
        let g = Grid::new(1, 64, TAU).unwrap();
        let u0 = GridField::from_fn(g.clone(), |x| x[0].sin())
            .unwrap()
            .forward();
        let c = heat(1, Matrix::diagonal(&[0.5]), 1);
        let u = evolve_multiplier(&u0, &c, 0.0, 1.0).unwrap().inverse();
        let want = GridField::from_fn(g, |x| (-0.5f64).exp() * x[0].sin()).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-12);
        assert!(evolve_multiplier(&u0, &c, 0.6, 0.5).is_err());
    }

    #[test]
    fn degenerate_direction_is_untouched() {
        let g = Grid::new(2, 16, TAU).unwrap();
        let u0 = GridField::from_fn(g.clone(), |x| x[1].cos() + x[0].sin())
            .unwrap()
            .forward();
        let c = heat(2, Matrix::diagonal(&[1.0, 0.0]), 3);
        let u = evolve_multiplier(&u0, &c, 0.0, 0.7).unwrap();
        let m1 = g.mode_index(&[0, 1]);
        let m2 = g.mode_index(&[1, 0]);
        assert_eq!(u.coeffs()[m1], u0.coeffs()[m1]);
        assert!((u.coeffs()[m2] - u0.coeffs()[m2] * (-0.7f64).exp()).norm() < 1e-13);
    }

    #[test]
    fn semigroup() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let u0 = GridField::from_fn(g, |x| (x[0].sin() + 2.0).ln())
            .unwrap()
            .forward();
        let t = TimeGrid::new(vec![0.0, 0.3, 0.35, 1.0]).unwrap();
        let a = vec![
            Matrix::diagonal(&[0.2]),
            Matrix::diagonal(&[3.0]),
            Matrix::diagonal(&[0.0]),
        ];
        let c = CoefficientPath::noiseless(t, a, "pc").unwrap();
        let direct = evolve_multiplier(&u0, &c, 0.1, 0.9).unwrap();
        let split = evolve_multiplier(
            &evolve_multiplier(&u0, &c, 0.1, 0.32).unwrap(),
            &c,
            0.32,
            0.9,
        )
        .unwrap();
        for (x, y) in direct.coeffs().iter().zip(split.coeffs()) {
            assert!((x - y).norm() <= 1e-13 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn constant_forcing_grows_dc_linearly() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let c = heat(1, Matrix::diagonal(&[0.8]), 5);
        let f = Forcing::from_field(&GridField::from_fn(g.clone(), |_| 1.5).unwrap());
        let u = solve_deterministic(&Spectrum::zeros(g.clone(), 1), &f, &c).unwrap();
        for m in 0..=5 {
            let t = c.time().node(m);
            let field = u.field(m);
            assert!(field
                .values()
                .iter()
                .all(|v| (v.re - 1.5 * t).abs() < 1e-13));
        }
    }

    #[test]
    fn no_diffusion_integrates_forcing() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let t = TimeGrid::uniform(2.0, 4).unwrap();
        let c = CoefficientPath::noiseless(t, vec![Matrix::zeros(1, 1); 4], "zero").unwrap();
        let u0 = GridField::from_fn(g.clone(), |x| (3.0 * x[0]).cos()).unwrap();
        let base = GridField::from_fn(g.clone(), |x| x[0].sin())
            .unwrap()
            .forward();
        let f = Forcing::modulated(base, vec![1.0, -2.0, 0.5, 0.0]).unwrap();
        let u = solve_deterministic(&u0.forward(), &f, &c).unwrap();
        let integral = 0.5 * (1.0 - 2.0 + 0.5);
        let want = GridField::from_fn(g, |x| (3.0 * x[0]).cos() + integral * x[0].sin()).unwrap();
        assert!(u.field(4).max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn gaussian_heat_kernel() {
        // Final variance 0.14: the Gaussian is below 1e-15 at distance π, so
        // periodization is invisible.
        let g = Grid::new(1, 256, TAU).unwrap();
        let s0: f64 = 0.2;
        let (a, t) = (0.5, 0.1);
        let u0 = GridField::from_fn(g.clone(), |x| {
            (-(x[0] - PI).powi(2) / (2.0 * s0 * s0)).exp()
        })
        .unwrap();
        let c = CoefficientPath::constant(
            TimeGrid::uniform(t, 1).unwrap(),
            Matrix::diagonal(&[a]),
            Matrix::zeros(1, 1),
            "heat",
        )
        .unwrap();
        let u = solve_deterministic(&u0.forward(), &Forcing::zero(), &c)
            .unwrap()
            .field(1);
        let var = s0 * s0 + 2.0 * a * t;
        let want = GridField::from_fn(g, |x| {
            s0 / var.sqrt() * (-(x[0] - PI).powi(2) / (2.0 * var)).exp()
        })
        .unwrap();
        assert!(u.max_abs_diff(&want) < 1e-10);
        assert!(lp_norm(&u, 3.0).unwrap() <= lp_norm(&u0, 3.0).unwrap());
    }
}
