use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::Real;

use super::grid::Grid;

/// Samples of a (possibly `l_2`-valued) function on a periodic grid.
///
/// Components are stored one after another: component `k` occupies
/// `values[k * n^d .. (k + 1) * n^d]`.
#[derive(Clone, Debug)]
pub struct GridField<T: Real> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
    arity: usize,
}

/// Discrete Fourier coefficients of a [`GridField`].
///
/// Convention: `c(ξ) = h^d Σ_x v(x) e^{-i x·ξ}` and
/// `v(x) = L^{-d} Σ_ξ c(ξ) e^{i x·ξ}`, so `Σ_x |v|^2 h^d = L^{-d} Σ_ξ |c|^2`
/// and band-limited functions have coefficients equal to their continuum
/// Fourier transform over one period.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    grid: Grid<T>,
    coeffs: Vec<Complex<T>>,
    arity: usize,
}

fn check_finite<T: Real>(values: &[Complex<T>], what: &'static str) -> Result<()> {
    match values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        Some(index) => Err(LabError::NonFinite { what, index }),
        None => Ok(()),
    }
}

fn check_len<T: Real>(grid: &Grid<T>, len: usize, arity: usize) -> Result<()> {
    if arity == 0 || len != grid.len() * arity {
        return Err(LabError::Shape(format!(
            "expected {} x {arity} values, got {len}",
            grid.len()
        )));
    }
    Ok(())
}

impl<T: Real> GridField<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>, arity: usize) -> Result<Self> {
        check_len(&grid, values.len(), arity)?;
        check_finite(&values, "field")?;
        Ok(Self {
            grid,
            values,
            arity,
        })
    }

    pub fn from_real(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        Self::new(
            grid,
            values
                .into_iter()
                .map(|v| Complex::new(v, T::zero()))
                .collect(),
            1,
        )
    }

    pub fn zeros(grid: Grid<T>, arity: usize) -> Self {
        let len = grid.len() * arity;
        Self {
            grid,
            values: vec![Complex::new(T::zero(), T::zero()); len],
            arity,
        }
    }

    /// Samples a real scalar function at the grid points.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                Complex::new(f(&x[..grid.dim()]), T::zero())
            })
            .collect();
        Self::new(grid, values, 1)
    }

    /// Stacks scalar fields into an `l_2`-valued field.
    pub fn stack(components: &[GridField<T>]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| LabError::Shape("cannot stack zero components".into()))?;
        let mut values = Vec::with_capacity(first.grid.len() * components.len());
        for c in components {
            if c.grid != first.grid || c.arity != 1 {
                return Err(LabError::Shape(
                    "stacked components must be scalar on one grid".into(),
                ));
            }
            values.extend_from_slice(&c.values);
        }
        Ok(Self {
            grid: first.grid.clone(),
            values,
            arity: components.len(),
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn component(&self, k: usize) -> &[Complex<T>] {
        let n = self.grid.len();
        &self.values[k * n..(k + 1) * n]
    }

    /// Real parts of the samples.
    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.im.abs()))
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == T::zero())
    }

    /// Drops imaginary parts (round-off residue of real computations).
    pub fn into_real(mut self) -> Self {
        for v in &mut self.values {
            v.im = T::zero();
        }
        self
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// Reinterprets the samples as `u(c x)` with `c = 2^levels` on the
    /// correspondingly shrunken period cell.
    pub fn dilate(&self, levels: u32) -> Result<Self> {
        Ok(Self {
            grid: self.grid.dilated(levels)?,
            values: self.values.clone(),
            arity: self.arity,
        })
    }

    pub fn forward(&self) -> Spectrum<T> {
        let mut coeffs = self.values.clone();
        let n = self.grid.len();
        for chunk in coeffs.chunks_mut(n) {
            super::transform::fft_nd(&self.grid, chunk, false);
        }
        let scale = self.grid.point_volume();
        for c in &mut coeffs {
            *c = *c * scale;
        }
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
            arity: self.arity,
        }
    }
}

impl<T: Real> Spectrum<T> {
    pub fn new(grid: Grid<T>, coeffs: Vec<Complex<T>>, arity: usize) -> Result<Self> {
        check_len(&grid, coeffs.len(), arity)?;
        check_finite(&coeffs, "spectrum")?;
        Ok(Self {
            grid,
            coeffs,
            arity,
        })
    }

    pub fn zeros(grid: Grid<T>, arity: usize) -> Self {
        let len = grid.len() * arity;
        Self {
            grid,
            coeffs: vec![Complex::new(T::zero(), T::zero()); len],
            arity,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn component(&self, k: usize) -> &[Complex<T>] {
        let n = self.grid.len();
        &self.coeffs[k * n..(k + 1) * n]
    }

    /// Scalar spectrum of component `k`.
    pub fn component_spectrum(&self, k: usize) -> Spectrum<T> {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self.component(k).to_vec(),
            arity: 1,
        }
    }

    pub fn is_finite(&self) -> bool {
        check_finite(&self.coeffs, "spectrum").is_ok()
    }

    pub fn inverse(&self) -> GridField<T> {
        let mut values = self.coeffs.clone();
        let n = self.grid.len();
        for chunk in values.chunks_mut(n) {
            super::transform::fft_nd(&self.grid, chunk, true);
        }
        let scale = self.grid.cell_volume().recip();
        for v in &mut values {
            *v = *v * scale;
        }
        GridField {
            grid: self.grid.clone(),
            values,
            arity: self.arity,
        }
    }

    /// Multiplies every coefficient by `m(mode)`, applied to all components.
    pub fn apply_multiplier(&mut self, m: impl Fn(usize) -> Complex<T>) {
        let n = self.grid.len();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c = *c * m(i % n);
        }
    }

    pub fn map_multiplier(&self, m: impl Fn(usize) -> Complex<T>) -> Self {
        let mut out = self.clone();
        out.apply_multiplier(m);
        out
    }

    /// `‖v‖_{L_2}^2` from Parseval, with the pointwise `l_2` magnitude over components.
    pub fn l2_norm_sq(&self) -> T {
        let s: T = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        s / self.grid.cell_volume()
    }

    pub fn scale(&mut self, s: T) {
        for c in &mut self.coeffs {
            *c = *c * s;
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = *a + *b;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }
}
