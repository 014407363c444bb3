use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Default cap on the number of grid points `n^d`.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 22;

pub const MAX_DIM: usize = 3;

/// Uniform periodic grid on the box `[0, L)^d` standing in for `R^d`.
///
/// Points are stored row-major with the last axis fastest. Frequencies live on
/// the lattice `(2π/L) Z^d` truncated to the Nyquist box; index `n/2` along an
/// axis is the Nyquist frequency and is mapped to `-n/2`.
#[derive(Clone)]
pub struct Grid<T: Real> {
    dim: usize,
    n: usize,
    length: T,
    cache: Arc<GridCache<T>>,
}

struct GridCache<T: Real> {
    wavevectors: Vec<[T; MAX_DIM]>,
    norm_sq: Vec<T>,
    nyquist_mask: Vec<u8>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, n: usize, length: T) -> Result<Self> {
        Self::with_budget(dim, n, length, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(dim: usize, n: usize, length: T, budget: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(LabError::InvalidGrid(format!(
                "dimension {dim} outside 1..=3"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(LabError::InvalidGrid(format!(
                "period length must be positive, got {length}"
            )));
        }
        let total = n
            .checked_pow(dim as u32)
            .filter(|&t| t <= budget)
            .ok_or_else(|| {
                LabError::InvalidGrid(format!("{n}^{dim} points exceed the budget of {budget}"))
            })?;

        let step = T::TAU() / length;
        let mut wavevectors = Vec::with_capacity(total);
        let mut norm_sq = Vec::with_capacity(total);
        let mut nyquist_mask = Vec::with_capacity(total);
        for idx in 0..total {
            let k = integer_wavenumbers(idx, dim, n);
            let mut xi = [T::zero(); MAX_DIM];
            let mut mask = 0u8;
            for a in 0..dim {
                xi[a] = step * T::lit(k[a] as f64);
                if k[a] == -(n as i64) / 2 {
                    mask |= 1 << a;
                }
            }
            norm_sq.push(xi.iter().map(|&v| v * v).sum());
            wavevectors.push(xi);
            nyquist_mask.push(mask);
        }

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            dim,
            n,
            length,
            cache: Arc::new(GridCache {
                wavevectors,
                norm_sq,
                nyquist_mask,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Period length per axis.
    pub fn length(&self) -> T {
        self.length
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_usize_lossy(self.n)
    }

    /// Total number of points `n^d`.
    pub fn len(&self) -> usize {
        self.cache.norm_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `h^d` of one grid point.
    pub fn point_volume(&self) -> T {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume `L^d` of the periodic cell.
    pub fn cell_volume(&self) -> T {
        self.length.powi(self.dim as i32)
    }

    pub fn frequency_step(&self) -> T {
        T::TAU() / self.length
    }

    pub fn nyquist_frequency(&self) -> T {
        T::PI() * T::from_usize_lossy(self.n) / self.length
    }

    /// Wave vector `ξ` of a mode (unused trailing axes are zero).
    #[inline]
    pub fn wavevector(&self, mode: usize) -> &[T; MAX_DIM] {
        &self.cache.wavevectors[mode]
    }

    /// `|ξ|^2` of a mode.
    #[inline]
    pub fn norm_sq(&self, mode: usize) -> T {
        self.cache.norm_sq[mode]
    }

    pub fn norms_sq(&self) -> &[T] {
        &self.cache.norm_sq
    }

    /// True when the mode sits on the Nyquist index along `axis`.
    #[inline]
    pub fn is_nyquist(&self, mode: usize, axis: usize) -> bool {
        self.cache.nyquist_mask[mode] & (1 << axis) != 0
    }

    #[inline]
    pub fn touches_nyquist(&self, mode: usize) -> bool {
        self.cache.nyquist_mask[mode] != 0
    }

    pub fn integer_wavenumbers(&self, mode: usize) -> [i64; MAX_DIM] {
        integer_wavenumbers(mode, self.dim, self.n)
    }

    /// Flat index of the mode with the given integer wavenumbers (taken mod n).
    pub fn mode_index(&self, k: &[i64]) -> usize {
        let n = self.n as i64;
        k.iter()
            .take(self.dim)
            .fold(0usize, |acc, &ka| acc * self.n + ka.rem_euclid(n) as usize)
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, idx: usize) -> [T; MAX_DIM] {
        let h = self.spacing();
        let mut x = [T::zero(); MAX_DIM];
        let mut rest = idx;
        for a in (0..self.dim).rev() {
            x[a] = h * T::from_usize_lossy(rest % self.n);
            rest /= self.n;
        }
        x
    }

    /// Same samples viewed as the dilation `u(c x)` for `c = 2^levels`.
    pub fn dilated(&self, levels: u32) -> Result<Self> {
        let c = T::from_usize_lossy(1usize << levels);
        Self::new(self.dim, self.n, self.length / c)
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<T>> {
        &self.cache.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<T>> {
        &self.cache.inverse
    }
}

fn integer_wavenumbers(mode: usize, dim: usize, n: usize) -> [i64; MAX_DIM] {
    let mut k = [0i64; MAX_DIM];
    let mut rest = mode;
    for a in (0..dim).rev() {
        let i = (rest % n) as i64;
        k[a] = if i < n as i64 / 2 { i } else { i - n as i64 };
        rest /= n;
    }
    k
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}
