use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::Real;

use super::field::{GridField, Spectrum};
use super::grid::Grid;

/// Unnormalized in-place multidimensional DFT over one scalar component.
pub(crate) fn fft_nd<T: Real>(grid: &Grid<T>, data: &mut [Complex<T>], inverse: bool) {
    let n = grid.n();
    let d = grid.dim();
    let plan = if inverse {
        grid.inverse_plan()
    } else {
        grid.forward_plan()
    };
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        if stride == 1 {
            plan.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = n * stride;
        let mut line = vec![Complex::new(T::zero(), T::zero()); n];
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, l) in line.iter().enumerate() {
                    data[base + j * stride] = *l;
                }
            }
        }
    }
}

/// Forward transform with the `h^d`-scaled convention of [`Spectrum`].
pub fn forward_transform<T: Real>(field: &GridField<T>) -> Result<Spectrum<T>> {
    if let Some(index) = field
        .values()
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(LabError::NonFinite {
            what: "field",
            index,
        });
    }
    Ok(field.forward())
}

pub fn inverse_transform<T: Real>(spectrum: &Spectrum<T>) -> GridField<T> {
    spectrum.inverse()
}
