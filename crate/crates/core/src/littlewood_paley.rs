//! Dyadic partition of unity, Littlewood–Paley blocks and Besov norms.

use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::spectral_grid::{lp_norm, lp_norm_components, Grid, GridField, Spectrum};

/// Smooth bump supported in `(1/2, 2)`, centred at `5/4`.
pub fn bump<T: Real>(r: T) -> T {
    let t = T::lit(4.0) * (r - T::lit(1.25)) / T::lit(3.0);
    let s = T::one() - t * t;
    if s <= T::zero() {
        T::zero()
    } else {
        (-s.recip()).exp()
    }
}

/// Sum of `bump(2^{-l} r)` over all integers `l`; invariant under `r -> 2r`.
fn dyadic_mass<T: Real>(r: T) -> T {
    let centre = r.log2().floor().to_i32().unwrap_or(0);
    (centre - 2..=centre + 2)
        .map(|l| bump(r * T::lit(2.0).powi(-l)))
        .sum()
}

/// Radial profile `Ψ̂(r) = χ(r) / Σ_l χ(2^{-l} r)`; zero at `r = 0`.
pub fn profile<T: Real>(r: T) -> T {
    if r <= T::zero() {
        return T::zero();
    }
    let b = bump(r);
    if b == T::zero() {
        return T::zero();
    }
    b / dyadic_mass(r)
}

/// Partition of unity restricted to the dyadic shells a grid can represent.
#[derive(Clone, Debug)]
pub struct DyadicPartition<T: Real> {
    grid: Grid<T>,
    j_min: i32,
    j_max: i32,
}

/// Shells `j_min..=j_max` where `j_min` holds the lowest nonzero frequency and
/// `j_max = log2(Nyquist) - 1` keeps the top shell inside the Nyquist box.
pub fn build_partition<T: Real>(grid: &Grid<T>) -> Result<DyadicPartition<T>> {
    let j_min = grid
        .frequency_step()
        .log2()
        .floor()
        .to_i32()
        .unwrap_or(i32::MIN);
    let j_max = grid
        .nyquist_frequency()
        .log2()
        .floor()
        .to_i32()
        .unwrap_or(i32::MIN)
        - 1;
    if j_max - j_min + 1 < 3 {
        return Err(LabError::InvalidGrid(format!(
            "grid hosts only shells {j_min}..={j_max}; at least 3 dyadic shells are required"
        )));
    }
    Ok(DyadicPartition {
        grid: grid.clone(),
        j_min,
        j_max,
    })
}

impl<T: Real> DyadicPartition<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    fn radius(&self, mode: usize) -> T {
        self.grid.norm_sq(mode).sqrt()
    }

    /// `Ψ̂(2^{-j} ξ)` at a grid mode.
    pub fn multiplier(&self, j: i32, mode: usize) -> T {
        profile(self.radius(mode) * T::lit(2.0).powi(-j))
    }

    /// `Σ_{j ≤ 0} Ψ̂(2^{-j} ξ)`, with the zero frequency passed through.
    pub fn low_multiplier(&self, mode: usize) -> T {
        let r = self.radius(mode);
        if r == T::zero() {
            return T::one();
        }
        let top = r.log2().floor().to_i32().unwrap_or(0) + 2;
        let lo = top - 4;
        (lo..=top.min(0))
            .map(|j| profile(r * T::lit(2.0).powi(-j)))
            .sum()
    }

    /// `Σ_{j∈Z} Ψ̂(2^{-j} ξ)`; equals one for every nonzero frequency.
    pub fn partition_sum(&self, mode: usize) -> T {
        let r = self.radius(mode);
        if r == T::zero() {
            return T::zero();
        }
        let c = r.log2().floor().to_i32().unwrap_or(0);
        (c - 2..=c + 2)
            .map(|j| profile(r * T::lit(2.0).powi(-j)))
            .sum()
    }

    /// True when the mode lies strictly inside the covered band
    /// `2^{j_min-1} < |ξ| < 2^{j_max+1}`.
    pub fn covers(&self, mode: usize) -> bool {
        let r = self.radius(mode);
        r > T::lit(2.0).powi(self.j_min - 1) && r < T::lit(2.0).powi(self.j_max + 1)
    }

    fn check_grid(&self, grid: &Grid<T>) -> Result<()> {
        if grid != &self.grid {
            return Err(LabError::Shape(
                "field grid differs from the partition grid".into(),
            ));
        }
        Ok(())
    }

    pub fn block_spectrum(&self, spectrum: &Spectrum<T>, j: i32) -> Spectrum<T> {
        spectrum.map_multiplier(|m| Complex::new(self.multiplier(j, m), T::zero()))
    }

    pub fn low_block_spectrum(&self, spectrum: &Spectrum<T>) -> Spectrum<T> {
        spectrum.map_multiplier(|m| Complex::new(self.low_multiplier(m), T::zero()))
    }

    /// `Δ_j u`.
    pub fn block(&self, field: &GridField<T>, j: i32) -> Result<GridField<T>> {
        self.check_grid(field.grid())?;
        Ok(self.block_spectrum(&field.forward(), j).inverse())
    }

    /// `S_0 u`.
    pub fn low_block(&self, field: &GridField<T>) -> Result<GridField<T>> {
        self.check_grid(field.grid())?;
        Ok(self.low_block_spectrum(&field.forward()).inverse())
    }

    fn block_lp(&self, spectrum: &Spectrum<T>, j: i32, p: T) -> Result<T> {
        let b = self.block_spectrum(spectrum, j).inverse();
        lp_norm(&b, p)
    }

    pub fn besov_norm_spectrum(&self, spectrum: &Spectrum<T>, gamma: T, p: T) -> Result<T> {
        let low = lp_norm(&self.low_block_spectrum(spectrum).inverse(), p)?;
        let mut acc = T::zero();
        for j in 1..=self.j_max {
            let w = T::lit(2.0).powf(gamma * p * T::lit(j as f64));
            acc = acc + w * self.block_lp(spectrum, j, p)?.powf(p);
        }
        Ok(low + acc.powf(p.recip()))
    }

    pub fn homogeneous_besov_norm_spectrum(
        &self,
        spectrum: &Spectrum<T>,
        gamma: T,
        p: T,
    ) -> Result<T> {
        let mut acc = T::zero();
        for j in self.j_min..=self.j_max {
            let w = T::lit(2.0).powf(gamma * p * T::lit(j as f64));
            acc = acc + w * self.block_lp(spectrum, j, p)?.powf(p);
        }
        Ok(acc.powf(p.recip()))
    }

    /// `‖S_0 u‖_{L_p} + (Σ_{j≥1} 2^{γpj} ‖Δ_j u‖_{L_p}^p)^{1/p}` over the representable shells.
    pub fn besov_norm(&self, field: &GridField<T>, gamma: T, p: T) -> Result<T> {
        self.check_grid(field.grid())?;
        self.besov_norm_spectrum(&field.forward(), gamma, p)
    }

    /// `(Σ_j 2^{γpj} ‖Δ_j u‖_{L_p}^p)^{1/p}` over `j_min..=j_max`.
    pub fn homogeneous_besov_norm(&self, field: &GridField<T>, gamma: T, p: T) -> Result<T> {
        self.check_grid(field.grid())?;
        self.homogeneous_besov_norm_spectrum(&field.forward(), gamma, p)
    }

    /// Besov norm of an `l_2`-valued spectrum (pointwise `l_2` magnitude per block).
    pub fn besov_norm_vector(&self, spectrum: &Spectrum<T>, gamma: T, p: T) -> Result<T> {
        let lp = |s: Spectrum<T>| -> Result<T> {
            let f = s.inverse();
            let comps: Vec<&[Complex<T>]> = (0..f.arity()).map(|k| f.component(k)).collect();
            lp_norm_components(f.grid(), &comps, p)
        };
        let low = lp(self.low_block_spectrum(spectrum))?;
        let mut acc = T::zero();
        for j in 1..=self.j_max {
            let w = T::lit(2.0).powf(gamma * p * T::lit(j as f64));
            acc = acc + w * lp(self.block_spectrum(spectrum, j))?.powf(p);
        }
        Ok(low + acc.powf(p.recip()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid1(n: usize) -> Grid<f64> {
        Grid::new(1, n, TAU).unwrap()
    }

    #[test]
    fn profile_support() {
        assert_eq!(profile(0.5f64), 0.0);
        assert_eq!(profile(2.0f64), 0.0);
        assert_eq!(profile(2.3f64), 0.0);
        assert!(profile(1.0f64) > 0.0);
        for &r in &[0.3, 1.3, 7.9, 1000.5] {
            let total: f64 = (-20..20).map(|j| profile(r * 2f64.powi(-j))).sum();
            assert!((total - 1.0).abs() < 1e-14, "r={r}");
        }
    }

    #[test]
    fn partition_sums_to_one_in_range() {
        let p = build_partition(&grid1(64)).unwrap();
        let g = p.grid().clone();
        for m in 1..g.len() {
            if p.covers(m) {
                assert!((p.partition_sum(m) - 1.0).abs() < 1e-12);
            }
        }
        // |ξ| = 1.3 * 2^3 sits inside shell 3.
        let m = g.mode_index(&[10]);
        let s: f64 = (p.j_min() - 1..=p.j_max() + 1)
            .map(|j| p.multiplier(j, m))
            .sum();
        assert!((s - 1.0).abs() < 1e-12);
        // Outside the annulus the block multiplier vanishes.
        assert_eq!(p.multiplier(1, g.mode_index(&[5])), 0.0);
    }

    #[test]
    fn too_coarse_grid_rejected() {
        assert!(build_partition(&grid1(8)).is_err());
        assert!(build_partition(&grid1(16)).is_ok());
    }

    #[test]
    fn block_examples() {
        let g = grid1(64);
        let p = build_partition(&g).unwrap();
        // cos(4x) lives exactly at |ξ| = 4 = 2^2; only shell 2 is active there.
        let u = GridField::from_fn(g.clone(), |x| (4.0 * x[0]).cos()).unwrap();
        let s = p.multiplier(2, g.mode_index(&[4]));
        assert!((s - 1.0).abs() < 1e-14);
        let b = p.block(&u, 2).unwrap();
        assert!(b.max_abs_diff(&u) < 1e-13);
        assert!(p
            .block(&u, 0)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.norm() < 1e-14));
        // Low block keeps constants and kills |ξ| >= 4.
        let c = GridField::from_fn(g.clone(), |_| 2.5).unwrap();
        assert!(p.low_block(&c).unwrap().max_abs_diff(&c) < 1e-13);
        assert!(p
            .low_block(&u)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn besov_of_constant_and_zero() {
        let g = grid1(64);
        let p = build_partition(&g).unwrap();
        let z = GridField::zeros(g.clone(), 1);
        assert_eq!(p.besov_norm(&z, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(p.homogeneous_besov_norm(&z, 1.0, 2.0).unwrap(), 0.0);
        let c = GridField::from_fn(g, |_| -3.0).unwrap();
        let want = 3.0 * TAU.powf(1.0 / 3.0);
        assert!((p.besov_norm(&c, 1.5, 3.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn single_shell_homogeneous_norm() {
        let g = grid1(64);
        let p = build_partition(&g).unwrap();
        let u = GridField::from_fn(g, |x| (8.0 * x[0]).sin()).unwrap();
        let gamma = 0.7;
        let direct = 2f64.powf(gamma * 3.0) * lp_norm(&p.block(&u, 3).unwrap(), 4.0).unwrap();
        let h = p.homogeneous_besov_norm(&u, gamma, 4.0).unwrap();
        assert!((h - direct).abs() < 1e-12 * direct);
    }
}
