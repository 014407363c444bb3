//! Per-mode exponential integrator shared by the deterministic, additive and
//! shifted solvers, plus the Euler–Maruyama recursion.

use num_complex::Complex;

use crate::coefficient_model::{Matrix, TimeGrid};
use crate::error::{LabError, Result};
use crate::pde_solver::Forcing;
use crate::scalar::Real;
use crate::spectral_grid::{derivative_symbol, translation_symbol, Grid, Spectrum};
use crate::stochastic_drivers::{PathPositions, WienerPath};

/// `(1 - e^{-z}) / z`, equal to 1 at `z = 0`.
#[inline]
pub(crate) fn phi1<T: Real>(z: T) -> T {
    if z == T::zero() {
        T::one()
    } else if z.abs() < T::lit(1e-8) {
        T::one() - z / T::lit(2.0) + z * z / T::lit(6.0)
    } else {
        -(-z).exp_m1() / z
    }
}

pub(crate) struct Shift<'a, T: Real> {
    pub positions: &'a PathPositions<T>,
    pub sigma: &'a [Matrix<T>],
}

pub(crate) struct Problem<'a, T: Real> {
    pub u0: &'a Spectrum<T>,
    pub f: &'a Forcing<T>,
    pub g: &'a Forcing<T>,
    pub drift: &'a [Matrix<T>],
    pub time: &'a TimeGrid<T>,
    pub noise: Option<&'a WienerPath<T>>,
    pub shift: Option<Shift<'a, T>>,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn validate<T: Real>(p: &Problem<'_, T>) -> Result<()> {
    let grid = p.u0.grid();
    let m = p.time.intervals();
    if p.u0.arity() != 1 {
        return Err(LabError::Shape("initial condition must be scalar".into()));
    }
    if !p.u0.is_finite() {
        return Err(LabError::NonFinite {
            what: "initial condition",
            index: 0,
        });
    }
    if p.drift.len() != m || p.drift.iter().any(|a| a.rows() != grid.dim()) {
        return Err(LabError::Shape(format!(
            "need {m} drift matrices of size {}",
            grid.dim()
        )));
    }
    p.f.check(grid, m, 1, "f")?;
    match p.noise {
        Some(w) => {
            if !w.time().same_as(p.time) {
                return Err(LabError::TimeGrid(
                    "Wiener path and coefficients use different time grids".into(),
                ));
            }
            p.g.check(grid, m, w.drivers(), "g")?;
        }
        None if !p.g.is_zero() => {
            return Err(LabError::InvalidParameter(
                "g given without a Wiener path".into(),
            ));
        }
        None => {}
    }
    if let Some(s) = &p.shift {
        if s.positions.nodes() != m + 1 || s.positions.dim() != grid.dim() || s.sigma.len() != m {
            return Err(LabError::Shape(
                "shift process does not match the problem".into(),
            ));
        }
    }
    Ok(())
}

fn active_modes<T: Real>(p: &Problem<'_, T>) -> Vec<usize> {
    let z = zero::<T>();
    (0..p.u0.grid().len())
        .filter(|&mode| {
            p.u0.coeffs()[mode] != z || p.f.touches_mode(mode) || p.g.touches_mode(mode)
        })
        .collect()
}

fn gradient_symbols<T: Real>(grid: &Grid<T>, mode: usize) -> [Complex<T>; 3] {
    let mut out = [zero(); 3];
    for (i, slot) in out.iter_mut().enumerate().take(grid.dim()) {
        let mut alpha = [0u32; 3];
        alpha[i] = 1;
        *slot = derivative_symbol(grid, mode, &alpha[..grid.dim()]);
    }
    out
}

/// Exponential integrator; returns the spectra at every node.
pub(crate) fn integrate<T: Real>(p: &Problem<'_, T>) -> Result<Vec<Spectrum<T>>> {
    validate(p)?;
    let grid = p.u0.grid();
    let d = grid.dim();
    let n_int = p.time.intervals();
    let drivers = p.noise.map_or(0, |w| w.drivers());
    let mut out = vec![vec![zero::<T>(); grid.len()]; n_int + 1];
    let mut g_buf = vec![zero::<T>(); drivers];
    for mode in active_modes(p) {
        let xi = &grid.wavevector(mode)[..d];
        let grad = gradient_symbols(grid, mode);
        let mut v = p.u0.coeffs()[mode];
        out[0][mode] = v;
        for m in 0..n_int {
            let dt = p.time.dt(m);
            let qdt = p.drift[m].quadratic_form(xi) * dt;
            let e = (-qdt).exp();
            let mut forcing = p.f.coeff(m, 0, mode);
            for (k, gk) in g_buf.iter_mut().enumerate() {
                *gk = p.g.coeff(m, k, mode);
            }
            if let Some(s) = &p.shift {
                let back: Vec<T> = s.positions.at(m).iter().map(|&x| -x).collect();
                let phase = translation_symbol(grid, mode, &back);
                for (k, &gk) in g_buf.iter().enumerate() {
                    let mut coupling = zero::<T>();
                    for (i, gi) in grad.iter().enumerate().take(d) {
                        coupling = coupling + *gi * s.sigma[m][(i, k)];
                    }
                    forcing = forcing - coupling * gk;
                }
                forcing = forcing * phase;
                for gk in g_buf.iter_mut() {
                    *gk = *gk * phase;
                }
            }
            let mut noise = zero::<T>();
            if let Some(w) = p.noise {
                for (k, &gk) in g_buf.iter().enumerate() {
                    noise = noise + gk * w.increment(m, k);
                }
            }
            v = v * e + forcing * (dt * phi1(qdt)) + noise * e;
            out[m + 1][mode] = match &p.shift {
                Some(s) => v * translation_symbol(grid, mode, s.positions.at(m + 1)),
                None => v,
            };
        }
    }
    out.into_iter()
        .map(|c| Spectrum::new(grid.clone(), c, 1))
        .collect()
}

/// Euler–Maruyama for the full equation on a grid refined `substeps` times;
/// returns the spectra at the coarse nodes.
pub(crate) fn euler_maruyama<T: Real>(
    u0: &Spectrum<T>,
    f: &Forcing<T>,
    g: &Forcing<T>,
    a: &[Matrix<T>],
    sigma: &[Matrix<T>],
    w: &WienerPath<T>,
    substeps: usize,
) -> Result<Vec<Spectrum<T>>> {
    let grid = u0.grid();
    let d = grid.dim();
    let fine = w.time();
    let n_fine = fine.intervals();
    let drivers = w.drivers();
    let coarse = n_fine / substeps;
    let problem = Problem {
        u0,
        f,
        g,
        drift: a,
        time: fine,
        noise: Some(w),
        shift: None,
    };
    validate(&problem)?;
    let mut out = vec![vec![zero::<T>(); grid.len()]; coarse + 1];
    for mode in active_modes(&problem) {
        let xi = &grid.wavevector(mode)[..d];
        let grad = gradient_symbols(grid, mode);
        let mut u = u0.coeffs()[mode];
        out[0][mode] = u;
        for n in 0..n_fine {
            let dt = fine.dt(n);
            let q = a[n].quadratic_form(xi);
            let mut next = u + (f.coeff(n, 0, mode) - u * q) * dt;
            for k in 0..drivers {
                let mut coupling = zero::<T>();
                for (i, gi) in grad.iter().enumerate().take(d) {
                    coupling = coupling + *gi * sigma[n][(i, k)];
                }
                next = next + (coupling * u + g.coeff(n, k, mode)) * w.increment(n, k);
            }
            u = next;
            if (n + 1) % substeps == 0 {
                out[(n + 1) / substeps][mode] = u;
            }
        }
    }
    out.into_iter()
        .map(|c| Spectrum::new(grid.clone(), c, 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi1_limits() {
        assert_eq!(phi1(0.0f64), 1.0);
        assert!((phi1(1e-9f64) - (1.0 - 5e-10)).abs() < 1e-15);
        assert!((phi1(2.0f64) - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
        assert!((phi1(50.0f64) - 0.02).abs() < 1e-15);
    }
}
