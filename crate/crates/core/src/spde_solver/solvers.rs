use crate::coefficient_model::{CoefficientPath, DriftChoice, Matrix};
use crate::error::{LabError, Result};
use crate::pde_solver::{representation_estimate, Forcing, MonteCarloField};
use crate::scalar::Real;
use crate::spectral_grid::{Grid, GridField, Spectrum};
use crate::stochastic_drivers::{shift_process, WienerPath};

use super::engine::{euler_maruyama, integrate, Problem, Shift};
use super::trajectory::{RealizationIds, Trajectory};

/// Initial condition and free terms of one equation.
#[derive(Clone, Debug)]
pub struct SpdeData<T: Real> {
    pub u0: Spectrum<T>,
    pub f: Forcing<T>,
    /// `K` components, one per driver.
    pub g: Forcing<T>,
}

impl<T: Real> SpdeData<T> {
    pub fn new(u0: Spectrum<T>) -> Self {
        Self {
            u0,
            f: Forcing::zero(),
            g: Forcing::zero(),
        }
    }

    pub fn from_field(u0: &GridField<T>) -> Self {
        Self::new(u0.forward())
    }

    pub fn with_f(mut self, f: Forcing<T>) -> Self {
        self.f = f;
        self
    }

    pub fn with_g(mut self, g: Forcing<T>) -> Self {
        self.g = g;
        self
    }

    pub fn grid(&self) -> &Grid<T> {
        self.u0.grid()
    }

    pub fn refine(&self, factor: usize) -> Self {
        Self {
            u0: self.u0.clone(),
            f: self.f.refine(factor),
            g: self.g.refine(factor),
        }
    }
}

pub(crate) fn ids<T: Real>(coeffs: &CoefficientPath<T>, w: &WienerPath<T>) -> RealizationIds {
    RealizationIds {
        coefficient_seed: coeffs.seed(),
        wiener_seed: w.seed(),
        path_index: w.path_index(),
    }
}

fn check_dim<T: Real>(data: &SpdeData<T>, coeffs: &CoefficientPath<T>) -> Result<()> {
    if data.grid().dim() != coeffs.dim() {
        return Err(LabError::Shape(format!(
            "grid has d={}, coefficients d={}",
            data.grid().dim(),
            coeffs.dim()
        )));
    }
    Ok(())
}

/// `du = (A u_xx + f) dt + g^k dw^k` with `A` the chosen drift; `σ` is not
/// used.
pub fn solve_additive<T: Real>(
    data: &SpdeData<T>,
    coeffs: &CoefficientPath<T>,
    drift: DriftChoice,
    w: &WienerPath<T>,
) -> Result<Trajectory<T>> {
    check_dim(data, coeffs)?;
    let drift = coeffs.drift(drift)?;
    let states = integrate(&Problem {
        u0: &data.u0,
        f: &data.f,
        g: &data.g,
        drift: &drift,
        time: coeffs.time(),
        noise: Some(w),
        shift: None,
    })?;
    Trajectory::new(coeffs.time().clone(), states, ids(coeffs, w))
}

/// Full equation through `v(t, x) = u(t, x - x_t)`: the shifted problem has
/// drift `α` and free terms `f - σ^{ik} g^k_{x^i}`, `g`, all evaluated at
/// `x - x_t` with the left-endpoint shift on every interval.
pub fn solve_full<T: Real>(
    data: &SpdeData<T>,
    coeffs: &CoefficientPath<T>,
    w: &WienerPath<T>,
) -> Result<Trajectory<T>> {
    check_dim(data, coeffs)?;
    if !coeffs.has_noise() {
        return solve_additive(data, coeffs, DriftChoice::A, w);
    }
    let positions = shift_process(coeffs, w)?;
    let sigma: Vec<Matrix<T>> = (0..coeffs.intervals())
        .map(|m| coeffs.sigma(m).clone())
        .collect();
    let drift = coeffs.drift(DriftChoice::Alpha)?;
    let states = integrate(&Problem {
        u0: &data.u0,
        f: &data.f,
        g: &data.g,
        drift: &drift,
        time: coeffs.time(),
        noise: Some(w),
        shift: Some(Shift {
            positions: &positions,
            sigma: &sigma,
        }),
    })?;
    Trajectory::new(coeffs.time().clone(), states, ids(coeffs, w))
}

/// Euler–Maruyama per mode on `coeffs.time().refine(substeps)`; `w_fine` must
/// live on that grid. The result is reported at the coarse nodes.
pub fn euler_maruyama_oracle<T: Real>(
    data: &SpdeData<T>,
    coeffs: &CoefficientPath<T>,
    w_fine: &WienerPath<T>,
    substeps: usize,
) -> Result<Trajectory<T>> {
    check_dim(data, coeffs)?;
    let fine = coeffs.refine(substeps)?;
    if !fine.time().same_as(w_fine.time()) {
        return Err(LabError::TimeGrid(format!(
            "Wiener path must be given on the grid refined {substeps} times"
        )));
    }
    let data = data.refine(substeps);
    let a = fine.drift(DriftChoice::A)?;
    let sigma: Vec<Matrix<T>> = (0..fine.intervals())
        .map(|m| fine.sigma(m).clone())
        .collect();
    let states = euler_maruyama(&data.u0, &data.f, &data.g, &a, &sigma, w_fine, substeps)?;
    Trajectory::new(coeffs.time().clone(), states, ids(coeffs, w_fine))
}

/// Monte-Carlo version of `u(T)` for the additive equation with drift `a`:
/// inner averages over auxiliary paths, outer stochastic integral against the
/// given increments.
pub fn representation_oracle_spde<T: Real>(
    data: &SpdeData<T>,
    coeffs: &CoefficientPath<T>,
    w: &WienerPath<T>,
    n_aux_paths: usize,
    aux_seed: u64,
) -> Result<MonteCarloField<T>> {
    check_dim(data, coeffs)?;
    representation_estimate(
        &data.u0,
        &data.f,
        Some((&data.g, w)),
        coeffs,
        n_aux_paths,
        aux_seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient_model::{sample_path, CoefficientFamily, TimeGrid};
    use crate::pde_solver::solve_deterministic;
    use crate::spectral_grid::{lp_norm, sobolev_norm};
    use crate::stochastic_drivers::{sample_wiener, sample_wiener_refined};
    use std::f64::consts::TAU;

    fn grid1() -> Grid<f64> {
        Grid::new(1, 32, TAU).unwrap()
    }

    fn field(g: &Grid<f64>, f: impl Fn(f64) -> f64) -> GridField<f64> {
        GridField::from_fn(g.clone(), |x| f(x[0])).unwrap()
    }

    fn zero_coeffs(intervals: usize, k: usize) -> CoefficientPath<f64> {
        let t = TimeGrid::uniform(1.0, intervals).unwrap();
        CoefficientPath::constant(t, Matrix::zeros(1, 1), Matrix::zeros(1, k), "zero").unwrap()
    }

    #[test]
    fn without_diffusion_noise_just_accumulates() {
        let g = grid1();
        let c = zero_coeffs(6, 2);
        let w = sample_wiener(2, c.time(), 5, 0).unwrap();
        let g1 = field(&g, |x| x.sin());
        let g2 = field(&g, |x| (2.0 * x).cos());
        let data = SpdeData::from_field(&field(&g, |x| x.cos()))
            .with_g(Forcing::from_field(&GridField::stack(&[g1, g2]).unwrap()));
        let u = solve_additive(&data, &c, DriftChoice::A, &w).unwrap();
        let (w1, w2) = (w.terminal(0), w.terminal(1));
        let want = field(&g, |x| x.cos() + w1 * x.sin() + w2 * (2.0 * x).cos());
        assert!(u.field(6).max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn zero_noise_reduces_to_deterministic() {
        let g = grid1();
        let t = TimeGrid::uniform(1.0, 5).unwrap();
        let c = CoefficientPath::constant(t, Matrix::diagonal(&[0.7]), Matrix::zeros(1, 1), "heat")
            .unwrap();
        let w = sample_wiener(1, c.time(), 1, 0).unwrap();
        let f = Forcing::from_field(&field(&g, |x| (3.0 * x).sin()));
        let data = SpdeData::from_field(&field(&g, |x| x.cos())).with_f(f.clone());
        let a = solve_additive(&data, &c, DriftChoice::A, &w).unwrap();
        let b = solve_deterministic(&data.u0, &f, &c).unwrap();
        assert_eq!(a.max_abs_diff(&b), 0.0);
    }

    #[test]
    fn zero_sigma_full_equals_additive_bitwise() {
        let g = Grid::new(2, 16, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 4).unwrap();
        let fam = CoefficientFamily::RandomPsd {
            scale: 1.0,
            sigma_scale: 0.0,
            degenerate_prob: 0.5,
        };
        let c = sample_path::<f64>(&fam, 2, 2, &t, 3, 0).unwrap();
        let w = sample_wiener(2, c.time(), 2, 0).unwrap();
        let g1 = GridField::from_fn(g.clone(), |x| x[0].sin() * x[1].cos()).unwrap();
        let data =
            SpdeData::from_field(&GridField::from_fn(g.clone(), |x| (x[0] + x[1]).cos()).unwrap())
                .with_g(Forcing::from_field(
                    &GridField::stack(&[g1.clone(), g1]).unwrap(),
                ));
        let full = solve_full(&data, &c, &w).unwrap();
        let add = solve_additive(&data, &c, DriftChoice::A, &w).unwrap();
        assert_eq!(full.max_abs_diff(&add), 0.0);
    }

    #[test]
    fn transport_when_alpha_vanishes() {
        let g = grid1();
        let t = TimeGrid::uniform(1.0, 10).unwrap();
        let c = CoefficientPath::constant(
            t,
            Matrix::diagonal(&[0.5]),
            Matrix::diagonal(&[1.0]),
            "transport",
        )
        .unwrap();
        let w = sample_wiener(1, c.time(), 7, 3).unwrap();
        let u0 = field(&g, |x| (x.sin() + 1.5).recip() - 0.2 * (5.0 * x).cos());
        let u0 = u0.forward().map_multiplier(|m| {
            let k = g.integer_wavenumbers(m)[0].abs();
            if k < 10 {
                num_complex::Complex::new(1.0, 0.0)
            } else {
                num_complex::Complex::new(0.0, 0.0)
            }
        });
        let u = solve_full(&SpdeData::new(u0.clone()), &c, &w).unwrap();
        let path = w.values(0);
        for m in [3, 10] {
            let want = u0.translate(&[path[m]]).inverse();
            assert!(u.field(m).max_abs_diff(&want) < 1e-12);
            for s in [0.0, 1.5, -0.5] {
                let a = sobolev_norm(&u.field(m), s, 2.0).unwrap();
                let b = sobolev_norm(&u0.inverse(), s, 2.0).unwrap();
                assert!((a - b).abs() < 1e-12 * b);
            }
        }
    }

    #[test]
    fn euler_single_step_identity() {
        let g = grid1();
        let c = zero_coeffs(1, 1);
        let w = sample_wiener(1, c.time(), 0, 0).unwrap();
        let f = Forcing::from_field(&field(&g, |x| x.sin()));
        let data = SpdeData::from_field(&field(&g, |x| x.cos())).with_f(f);
        let u = euler_maruyama_oracle(&data, &c, &w, 1).unwrap();
        let want = field(&g, |x| x.cos() + x.sin());
        assert!(u.field(1).max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn euler_tracks_stochastic_exponential() {
        // Single mode e^{ix}, a = ½σ²: exact û(T) = e^{iσ w_T} û(0).
        let g = Grid::new(1, 8, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 1).unwrap();
        let c =
            CoefficientPath::constant(t, Matrix::diagonal(&[0.5]), Matrix::diagonal(&[1.0]), "gbm")
                .unwrap();
        let mode = g.mode_index(&[1]);
        let mut u0 = Spectrum::zeros(g.clone(), 1);
        u0.coeffs_mut()[mode] = num_complex::Complex::new(1.0, 0.0);
        let data = SpdeData::new(u0);
        let mut errs = [0.0; 2];
        let paths = 200;
        for i in 0..paths {
            let fine = sample_wiener_refined(1, c.time(), 256, 4, i).unwrap();
            let exact = num_complex::Complex::from_polar(1.0, fine.terminal(0));
            for (slot, s) in errs.iter_mut().zip([16, 256]) {
                let path = fine.coarsen(256 / s).unwrap();
                let u = euler_maruyama_oracle(&data, &c, &path, s).unwrap();
                *slot += (u.terminal().coeffs()[mode] - exact).norm() / paths as f64;
            }
        }
        // Strong order 1/2: sixteen times more steps, about four times smaller.
        let ratio = errs[0] / errs[1];
        assert!(ratio > 2.5 && ratio < 6.5, "{errs:?}");
    }

    #[test]
    fn shift_full_solution_is_contractive_in_l2() {
        let g = Grid::new(2, 16, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 8).unwrap();
        let fam = CoefficientFamily::VanishingEigenvalue {
            kappa: 1.0,
            period: 2,
            sigma: 0.8,
        };
        let c = sample_path::<f64>(&fam, 2, 2, &t, 0, 0).unwrap();
        let w = sample_wiener(2, c.time(), 9, 0).unwrap();
        let u0 = GridField::from_fn(g, |x| (x[0] - 2.0 * x[1]).sin() + x[1].cos()).unwrap();
        let u = solve_full(&SpdeData::from_field(&u0), &c, &w).unwrap();
        let start = lp_norm(&u0, 2.0).unwrap();
        for m in 0..=8 {
            assert!(lp_norm(&u.field(m), 2.0).unwrap() <= start * (1.0 + 1e-12));
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g = grid1();
        let c = zero_coeffs(4, 1);
        let w = sample_wiener(1, &TimeGrid::uniform(1.0, 5).unwrap(), 0, 0).unwrap();
        let data = SpdeData::from_field(&field(&g, |x| x.cos()));
        assert!(solve_additive(&data, &c, DriftChoice::A, &w).is_err());
        let w2 = sample_wiener(3, c.time(), 0, 0).unwrap();
        let g3 = Forcing::from_field(&field(&g, |x| x.sin()));
        assert!(solve_additive(&data.clone().with_g(g3), &c, DriftChoice::A, &w2).is_err());
    }
}
