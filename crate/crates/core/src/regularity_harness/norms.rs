use num_complex::Complex;

use crate::coefficient_model::{weighted_contribution, TimeGrid};
use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::spectral_grid::{bessel_symbol, derivative_symbol, lp_norm_components, Grid, Spectrum};

/// Which derivative of the field a spatial norm measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    /// `u` itself (all components).
    Value,
    /// `u_x`: gradient of every component, `l_2` over components and axes.
    Gradient,
    /// `u_xx`: full Hessian, `l_2` over entries.
    Hessian,
    /// `Δu`.
    Laplacian,
}

fn multi_index(d: usize, axes: &[usize]) -> [u32; 3] {
    let mut alpha = [0u32; 3];
    for &a in axes {
        debug_assert!(a < d);
        alpha[a] += 1;
    }
    alpha
}

/// Symbol lists `(multiplier per mode, weight)` for each component of the
/// requested derivative, before the Bessel lift.
fn derivative_components<T: Real>(grid: &Grid<T>, which: Derivative) -> Vec<(Vec<Complex<T>>, T)> {
    let d = grid.dim();
    let sym = |axes: &[usize]| -> Vec<Complex<T>> {
        let alpha = multi_index(d, axes);
        (0..grid.len())
            .map(|m| derivative_symbol(grid, m, &alpha[..d]))
            .collect()
    };
    match which {
        Derivative::Value => vec![(
            vec![Complex::new(T::one(), T::zero()); grid.len()],
            T::one(),
        )],
        Derivative::Gradient => (0..d).map(|i| (sym(&[i]), T::one())).collect(),
        Derivative::Hessian => {
            let mut out = Vec::new();
            for i in 0..d {
                for j in i..d {
                    let w = if i == j { T::one() } else { T::lit(2.0) };
                    out.push((sym(&[i, j]), w));
                }
            }
            out
        }
        Derivative::Laplacian => {
            let mut total = vec![Complex::new(T::zero(), T::zero()); grid.len()];
            for i in 0..d {
                for (t, s) in total.iter_mut().zip(sym(&[i, i])) {
                    *t = *t + s;
                }
            }
            vec![(total, T::one())]
        }
    }
}

/// Precomputed multipliers for `‖D u‖_{H^γ_p}` on one grid.
#[derive(Clone, Debug)]
pub struct SpatialNorm<T: Real> {
    grid: Grid<T>,
    gamma: T,
    p: T,
    which: Derivative,
    /// `(lifted symbol, sqrt(weight))` per derivative component.
    parts: Vec<(Vec<Complex<T>>, T)>,
}

impl<T: Real> SpatialNorm<T> {
    pub fn new(grid: &Grid<T>, which: Derivative, gamma: T, p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() || !gamma.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "need finite γ and p >= 1, got γ={gamma}, p={p}"
            )));
        }
        let lift: Vec<T> = (0..grid.len())
            .map(|m| bessel_symbol(grid, m, gamma))
            .collect();
        let parts = derivative_components(grid, which)
            .into_iter()
            .map(|(s, w)| {
                (
                    s.into_iter().zip(&lift).map(|(c, &l)| c * l).collect(),
                    w.sqrt(),
                )
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            gamma,
            p,
            which,
            parts,
        })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn which(&self) -> Derivative {
        self.which
    }

    /// `‖D u‖_{H^γ_p}` for a spectrum of any arity; `p = 2` uses Parseval.
    pub fn eval(&self, u: &Spectrum<T>) -> Result<T> {
        if u.grid() != &self.grid {
            return Err(LabError::Shape("spectrum lives on a different grid".into()));
        }
        if self.p == T::lit(2.0) {
            let mut acc = T::zero();
            for k in 0..u.arity() {
                let c = u.component(k);
                for (sym, w) in &self.parts {
                    let s: T = c.iter().zip(sym).map(|(a, b)| (*a * *b).norm_sqr()).sum();
                    acc = acc + s * *w * *w;
                }
            }
            return Ok((acc / self.grid.cell_volume()).sqrt());
        }
        let mut fields: Vec<Vec<Complex<T>>> = Vec::with_capacity(u.arity() * self.parts.len());
        for k in 0..u.arity() {
            let c = u.component(k);
            for (sym, w) in &self.parts {
                let coeffs: Vec<Complex<T>> =
                    c.iter().zip(sym).map(|(a, b)| *a * *b * *w).collect();
                fields.push(
                    Spectrum::new(self.grid.clone(), coeffs, 1)?
                        .inverse()
                        .into_values(),
                );
            }
        }
        let refs: Vec<&[Complex<T>]> = fields.iter().map(|f| f.as_slice()).collect();
        lp_norm_components(&self.grid, &refs, self.p)
    }

    /// `‖D u‖^p_{H^γ_p}`.
    pub fn eval_pow(&self, u: &Spectrum<T>) -> Result<T> {
        Ok(self.eval(u)?.powf(self.p))
    }
}

/// One-off `‖D u‖_{H^γ_p}`.
pub fn derivative_norm<T: Real>(u: &Spectrum<T>, which: Derivative, gamma: T, p: T) -> Result<T> {
    SpatialNorm::new(u.grid(), which, gamma, p)?.eval(u)
}

/// `Σ_m weight_m · value(t_m) · Δt_m` over the intervals of `time`
/// (left-point values, piecewise-constant weights, `0·∞ = 0`).
pub fn weighted_time_sum<T: Real>(time: &TimeGrid<T>, node_values: &[T], weights: &[T]) -> T {
    (0..time.intervals())
        .map(|m| weighted_contribution(weights[m], node_values[m] * time.dt(m)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_grid::{derivative, lp_norm, GridField};
    use std::f64::consts::TAU;

    #[test]
    fn hessian_of_plane_wave() {
        let g = Grid::new(2, 16, TAU).unwrap();
        let u = GridField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin())
            .unwrap()
            .forward();
        // |D²u| = |ξ|² |sin| pointwise with |ξ|² = 5.
        let l2 = derivative_norm(&u, Derivative::Hessian, 0.0, 2.0).unwrap();
        assert!((l2 - 5.0 * (TAU * TAU / 2.0).sqrt()).abs() < 1e-11);
        let l4 = derivative_norm(&u, Derivative::Hessian, 0.0, 4.0).unwrap();
        let want = 5.0 * (TAU * TAU * 3.0 / 8.0).powf(0.25);
        assert!((l4 - want).abs() < 1e-11);
        let lap = derivative_norm(&u, Derivative::Laplacian, 0.0, 4.0).unwrap();
        assert!((lap - want).abs() < 1e-11);
    }

    #[test]
    fn gradient_matches_direct_quadrature() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let f = GridField::from_fn(g.clone(), |x| (x[0].cos() + 1.3).ln()).unwrap();
        let direct = lp_norm(&derivative(&f, &[1]), 3.0).unwrap();
        let got = derivative_norm(&f.forward(), Derivative::Gradient, 0.0, 3.0).unwrap();
        assert!((direct - got).abs() < 1e-12 * direct);
        let lifted = derivative_norm(&f.forward(), Derivative::Value, 1.0, 2.0).unwrap();
        let via_field = crate::spectral_grid::sobolev_norm(&f, 1.0, 2.0).unwrap();
        assert!((lifted - via_field).abs() < 1e-12 * via_field);
    }
}
