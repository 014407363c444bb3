use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::spectral_grid::{Grid, GridField};

/// `φ^ε(x) = ε^{-d} φ(x/ε)` sampled on the grid with the periodic minimal
/// image, `φ(x) ∝ exp(-1/(1-|x|^2))` on the unit ball, scaled to unit
/// discrete mass.
pub fn mollifier_kernel<T: Real>(grid: &Grid<T>, eps: T) -> Result<GridField<T>> {
    let length = grid.length();
    if !(eps > T::zero()) || eps > length / T::lit(4.0) {
        return Err(LabError::InvalidParameter(format!(
            "mollifier scale must lie in (0, L/4], got {eps}"
        )));
    }
    let half = length / T::lit(2.0);
    let d = grid.dim();
    let values: Vec<T> = (0..grid.len())
        .map(|idx| {
            let x = grid.point(idx);
            let r2 = x[..d]
                .iter()
                .map(|&c| {
                    let c = if c > half { c - length } else { c };
                    (c / eps) * (c / eps)
                })
                .sum::<T>();
            if r2 < T::one() {
                (-(T::one() - r2).recip()).exp()
            } else {
                T::zero()
            }
        })
        .collect();
    let mass = values.iter().copied().sum::<T>() * grid.point_volume();
    GridField::from_real(grid.clone(), values.into_iter().map(|v| v / mass).collect())
}

/// Periodic convolution `u * φ^ε`, computed spectrally.
pub fn mollify<T: Real>(field: &GridField<T>, eps: T) -> Result<GridField<T>> {
    let kernel = mollifier_kernel(field.grid(), eps)?.forward();
    let k = kernel.coeffs().to_vec();
    Ok(field.forward().map_multiplier(|m| k[m]).inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_grid::lp_norm;
    use std::f64::consts::TAU;

    #[test]
    fn constants_are_fixed() {
        let g = Grid::new(2, 32, TAU).unwrap();
        let c = GridField::from_fn(g, |_| 1.75).unwrap();
        assert!(mollify(&c, 0.4).unwrap().max_abs_diff(&c) < 1e-13);
    }

    #[test]
    fn converges_as_scale_shrinks() {
        let g = Grid::new(1, 512, TAU).unwrap();
        let u = GridField::from_fn(g, |x| (x[0].sin() + 1.5).recip()).unwrap();
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&e| {
                let v = mollify(&u, e).unwrap();
                let diff: Vec<f64> = v
                    .values()
                    .iter()
                    .zip(u.values())
                    .map(|(a, b)| (a - b).re)
                    .collect();
                lp_norm(&GridField::from_real(u.grid().clone(), diff).unwrap(), 2.0).unwrap()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn young_inequality() {
        let g = Grid::new(1, 128, TAU).unwrap();
        let u = GridField::from_fn(g, |x| (3.0 * x[0]).sin().signum() + 0.1 * x[0]).unwrap();
        for p in [2.0, 3.0, 6.0] {
            let v = mollify(&u, 0.3).unwrap();
            assert!(lp_norm(&v, p).unwrap() <= lp_norm(&u, p).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn scale_out_of_range() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        assert!(mollifier_kernel(&g, 1.5).is_err());
        assert!(mollifier_kernel(&g, 0.0).is_err());
    }
}
