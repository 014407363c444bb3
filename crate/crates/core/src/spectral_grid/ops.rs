use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::Real;

use super::field::{GridField, Spectrum};
use super::grid::Grid;

/// Bessel-potential symbol `(1 + |ξ|^2)^{s/2}`.
#[inline]
pub fn bessel_symbol<T: Real>(grid: &Grid<T>, mode: usize, s: T) -> T {
    if s == T::zero() {
        return T::one();
    }
    (T::one() + grid.norm_sq(mode)).powf(s / T::lit(2.0))
}

/// Symbol `(iξ)^α` of `D^α`. Odd derivatives along a Nyquist axis are zeroed
/// so real fields stay real.
pub fn derivative_symbol<T: Real>(grid: &Grid<T>, mode: usize, alpha: &[u32]) -> Complex<T> {
    let xi = grid.wavevector(mode);
    let mut out = Complex::new(T::one(), T::zero());
    for (axis, &order) in alpha.iter().enumerate().take(grid.dim()) {
        if order == 0 {
            continue;
        }
        if order % 2 == 1 && grid.is_nyquist(mode, axis) {
            return Complex::new(T::zero(), T::zero());
        }
        out = out * Complex::new(T::zero(), xi[axis]).powu(order);
    }
    out
}

/// Symbol of the translation `u(·) -> u(· + y)`. Nyquist axes use
/// `cos(ξ y)` so real fields stay real (trigonometric interpolation).
pub fn translation_symbol<T: Real>(grid: &Grid<T>, mode: usize, y: &[T]) -> Complex<T> {
    let xi = grid.wavevector(mode);
    let mut phase = T::zero();
    let mut scale = T::one();
    for (axis, &ya) in y.iter().enumerate().take(grid.dim()) {
        if grid.is_nyquist(mode, axis) {
            scale = scale * (xi[axis] * ya).cos();
        } else {
            phase = phase + xi[axis] * ya;
        }
    }
    Complex::from_polar(scale, phase)
}

impl<T: Real> Spectrum<T> {
    /// Spectrum of `u(· + y)`.
    pub fn translate(&self, y: &[T]) -> Self {
        let grid = self.grid().clone();
        self.map_multiplier(|m| translation_symbol(&grid, m, y))
    }

    pub fn bessel(&self, s: T) -> Self {
        if s == T::zero() {
            return self.clone();
        }
        let grid = self.grid().clone();
        self.map_multiplier(|m| Complex::new(bessel_symbol(&grid, m, s), T::zero()))
    }

    pub fn derivative(&self, alpha: &[u32]) -> Self {
        let grid = self.grid().clone();
        self.map_multiplier(|m| derivative_symbol(&grid, m, alpha))
    }
}

/// `(1 - Δ)^{s/2}` applied spectrally.
pub fn bessel_potential<T: Real>(field: &GridField<T>, s: T) -> GridField<T> {
    field.forward().bessel(s).inverse()
}

/// Spectral derivative `D^α`, with `α` given per axis.
pub fn derivative<T: Real>(field: &GridField<T>, alpha: &[u32]) -> GridField<T> {
    field.forward().derivative(alpha).inverse()
}

fn check_exponent<T: Real>(p: T) -> Result<()> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(LabError::InvalidParameter(format!(
            "L_p exponent must lie in [1, ∞), got {p}"
        )));
    }
    Ok(())
}

/// `(Σ_x |v(x)|^p h^d)^{1/p}` where `|v(x)|` is the `l_2` magnitude over the
/// listed components.
pub fn lp_norm_components<T: Real>(
    grid: &Grid<T>,
    components: &[&[Complex<T>]],
    p: T,
) -> Result<T> {
    check_exponent(p)?;
    let n = grid.len();
    let two = T::lit(2.0);
    let mut acc = T::zero();
    for i in 0..n {
        let sq: T = components.iter().map(|c| c[i].norm_sqr()).sum();
        acc = acc + if p == two { sq } else { sq.powf(p / two) };
    }
    Ok((acc * grid.point_volume()).powf(p.recip()))
}

/// Rectangle-rule `L_p` norm over the periodic cell (exact for trigonometric
/// polynomials of low enough degree).
pub fn lp_norm<T: Real>(field: &GridField<T>, p: T) -> Result<T> {
    let comps: Vec<&[Complex<T>]> = (0..field.arity()).map(|k| field.component(k)).collect();
    lp_norm_components(field.grid(), &comps, p)
}

/// `‖(1 - Δ)^{γ/2} u‖_{L_p}`.
pub fn sobolev_norm<T: Real>(field: &GridField<T>, gamma: T, p: T) -> Result<T> {
    check_exponent(p)?;
    if gamma == T::zero() {
        return lp_norm(field, p);
    }
    lp_norm(&bessel_potential(field, gamma), p)
}

/// Sobolev norm of a spectrum; `p = 2` goes through Parseval, other
/// exponents through quadrature after the multiplier.
pub fn spectral_sobolev_norm<T: Real>(spectrum: &Spectrum<T>, gamma: T, p: T) -> Result<T> {
    check_exponent(p)?;
    let lifted = spectrum.bessel(gamma);
    if p == T::lit(2.0) {
        return Ok(lifted.l2_norm_sq().sqrt());
    }
    lp_norm(&lifted.inverse(), p)
}
