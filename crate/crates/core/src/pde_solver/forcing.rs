use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::spectral_grid::{Grid, GridField, Spectrum};

#[derive(Clone, Debug)]
enum Repr<T: Real> {
    Zero,
    Constant(Spectrum<T>),
    /// `scale[m] * base` on interval `m`.
    Modulated {
        base: Spectrum<T>,
        scale: Vec<T>,
    },
    Piecewise(Vec<Spectrum<T>>),
}

/// Free term (`f`, or the `K`-vector `g`) held in Fourier space and constant
/// on each interval of the time grid.
#[derive(Clone, Debug)]
pub struct Forcing<T: Real> {
    repr: Repr<T>,
}

impl<T: Real> Default for Forcing<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> Forcing<T> {
    pub fn zero() -> Self {
        Self { repr: Repr::Zero }
    }

    pub fn constant(spectrum: Spectrum<T>) -> Self {
        Self {
            repr: Repr::Constant(spectrum),
        }
    }

    pub fn from_field(field: &GridField<T>) -> Self {
        Self::constant(field.forward())
    }

    pub fn modulated(base: Spectrum<T>, scale: Vec<T>) -> Result<Self> {
        if scale.iter().any(|s| !s.is_finite()) {
            return Err(LabError::NonFinite {
                what: "forcing time profile",
                index: 0,
            });
        }
        Ok(Self {
            repr: Repr::Modulated { base, scale },
        })
    }

    pub fn piecewise(spectra: Vec<Spectrum<T>>) -> Result<Self> {
        let first = spectra
            .first()
            .ok_or_else(|| LabError::Shape("empty forcing sequence".into()))?;
        if spectra
            .iter()
            .any(|s| s.grid() != first.grid() || s.arity() != first.arity())
        {
            return Err(LabError::Shape(
                "forcing spectra must share grid and arity".into(),
            ));
        }
        if let Some(index) = spectra.iter().position(|s| !s.is_finite()) {
            return Err(LabError::NonFinite {
                what: "forcing",
                index,
            });
        }
        Ok(Self {
            repr: Repr::Piecewise(spectra),
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn arity(&self) -> Option<usize> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Constant(s) | Repr::Modulated { base: s, .. } => Some(s.arity()),
            Repr::Piecewise(v) => Some(v[0].arity()),
        }
    }

    fn grid(&self) -> Option<&Grid<T>> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Constant(s) | Repr::Modulated { base: s, .. } => Some(s.grid()),
            Repr::Piecewise(v) => Some(v[0].grid()),
        }
    }

    /// Number of intervals the forcing is pinned to, if any.
    pub fn intervals(&self) -> Option<usize> {
        match &self.repr {
            Repr::Modulated { scale, .. } => Some(scale.len()),
            Repr::Piecewise(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn check(&self, grid: &Grid<T>, intervals: usize, arity: usize, what: &str) -> Result<()> {
        if let Some(g) = self.grid() {
            if g != grid {
                return Err(LabError::Shape(format!("{what} lives on a different grid")));
            }
        }
        if let Some(a) = self.arity() {
            if a != arity {
                return Err(LabError::Shape(format!(
                    "{what} has {a} components, expected {arity}"
                )));
            }
        }
        if let Some(m) = self.intervals() {
            if m != intervals {
                return Err(LabError::TimeGrid(format!(
                    "{what} is given on {m} intervals, expected {intervals}"
                )));
            }
        }
        if let Repr::Constant(s) | Repr::Modulated { base: s, .. } = &self.repr {
            if !s.is_finite() {
                return Err(LabError::NonFinite {
                    what: "forcing",
                    index: 0,
                });
            }
        }
        Ok(())
    }

    /// Fourier coefficient of component `k` at `mode` on interval `m`.
    #[inline]
    pub fn coeff(&self, m: usize, k: usize, mode: usize) -> Complex<T> {
        match &self.repr {
            Repr::Zero => Complex::new(T::zero(), T::zero()),
            Repr::Constant(s) => s.component(k)[mode],
            Repr::Modulated { base, scale } => base.component(k)[mode] * scale[m],
            Repr::Piecewise(v) => v[m].component(k)[mode],
        }
    }

    /// Whether any component is nonzero at `mode` on some interval.
    pub fn touches_mode(&self, mode: usize) -> bool {
        let zero = Complex::new(T::zero(), T::zero());
        let hit = |s: &Spectrum<T>| (0..s.arity()).any(|k| s.component(k)[mode] != zero);
        match &self.repr {
            Repr::Zero => false,
            Repr::Constant(s) => hit(s),
            Repr::Modulated { base, scale } => scale.iter().any(|&c| c != T::zero()) && hit(base),
            Repr::Piecewise(v) => v.iter().any(hit),
        }
    }

    /// `(base, per-interval scale)` when the forcing is one spectrum times a
    /// time profile; `None` scale means constant.
    pub fn separable(&self) -> Option<(&Spectrum<T>, Option<&[T]>)> {
        match &self.repr {
            Repr::Constant(s) => Some((s, None)),
            Repr::Modulated { base, scale } => Some((base, Some(scale))),
            _ => None,
        }
    }

    /// Whether the forcing vanishes identically on interval `m`.
    pub fn vanishes_on(&self, m: usize) -> bool {
        let zero = Complex::new(T::zero(), T::zero());
        match &self.repr {
            Repr::Zero => true,
            Repr::Constant(s) => s.coeffs().iter().all(|&c| c == zero),
            Repr::Modulated { base, scale } => {
                scale[m] == T::zero() || base.coeffs().iter().all(|&c| c == zero)
            }
            Repr::Piecewise(v) => v[m].coeffs().iter().all(|&c| c == zero),
        }
    }

    /// Spectrum on interval `m`; `None` for the zero forcing.
    pub fn spectrum_at(&self, m: usize) -> Option<Spectrum<T>> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Constant(s) => Some(s.clone()),
            Repr::Modulated { base, scale } => {
                let mut s = base.clone();
                s.scale(scale[m]);
                Some(s)
            }
            Repr::Piecewise(v) => Some(v[m].clone()),
        }
    }

    /// Same forcing on a grid whose intervals are split `factor` times.
    pub fn refine(&self, factor: usize) -> Self {
        let repr = match &self.repr {
            Repr::Modulated { base, scale } => Repr::Modulated {
                base: base.clone(),
                scale: scale
                    .iter()
                    .flat_map(|&s| std::iter::repeat_n(s, factor))
                    .collect(),
            },
            Repr::Piecewise(v) => Repr::Piecewise(
                v.iter()
                    .flat_map(|s| std::iter::repeat_n(s.clone(), factor))
                    .collect(),
            ),
            other => other.clone(),
        };
        Self { repr }
    }

    /// Zeroes the forcing on every interval where `keep[m]` is false.
    pub fn masked(&self, keep: &[bool]) -> Self {
        let gate = |m: usize| if keep[m] { T::one() } else { T::zero() };
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Constant(base) => Repr::Modulated {
                base: base.clone(),
                scale: (0..keep.len()).map(gate).collect(),
            },
            Repr::Modulated { base, scale } => Repr::Modulated {
                base: base.clone(),
                scale: scale
                    .iter()
                    .enumerate()
                    .map(|(m, &s)| s * gate(m))
                    .collect(),
            },
            Repr::Piecewise(v) => Repr::Piecewise(
                v.iter()
                    .enumerate()
                    .map(|(m, s)| {
                        if keep[m] {
                            s.clone()
                        } else {
                            Spectrum::zeros(s.grid().clone(), s.arity())
                        }
                    })
                    .collect(),
            ),
        };
        Self { repr }
    }

    /// Applies a Fourier multiplier to every interval's spectrum.
    pub fn map_multiplier(&self, mult: impl Fn(usize) -> Complex<T>) -> Self {
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Constant(s) => Repr::Constant(s.map_multiplier(&mult)),
            Repr::Modulated { base, scale } => Repr::Modulated {
                base: base.map_multiplier(&mult),
                scale: scale.clone(),
            },
            Repr::Piecewise(v) => {
                Repr::Piecewise(v.iter().map(|s| s.map_multiplier(&mult)).collect())
            }
        };
        Self { repr }
    }

    /// Multiplies interval `m` by `factors[m]`.
    pub fn rescaled(&self, factors: &[T]) -> Self {
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Constant(base) => Repr::Modulated {
                base: base.clone(),
                scale: factors.to_vec(),
            },
            Repr::Modulated { base, scale } => Repr::Modulated {
                base: base.clone(),
                scale: scale.iter().zip(factors).map(|(&s, &c)| s * c).collect(),
            },
            Repr::Piecewise(v) => Repr::Piecewise(
                v.iter()
                    .zip(factors)
                    .map(|(s, &c)| {
                        let mut s = s.clone();
                        s.scale(c);
                        s
                    })
                    .collect(),
            ),
        };
        Self { repr }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> Spectrum<f64> {
        let g = Grid::new(1, 8, 1.0).unwrap();
        GridField::from_fn(g, |x| 1.0 + x[0]).unwrap().forward()
    }

    #[test]
    fn refine_and_mask() {
        let f = Forcing::constant(spec()).masked(&[true, false]);
        assert!(f.vanishes_on(1) && !f.vanishes_on(0));
        let r = f.refine(3);
        assert_eq!(r.intervals(), Some(6));
        assert!(r.vanishes_on(3) && !r.vanishes_on(2));
        assert_eq!(r.coeff(2, 0, 0), spec().coeffs()[0]);
    }

    #[test]
    fn shape_checks() {
        let f = Forcing::constant(spec());
        let g = spec().grid().clone();
        assert!(f.check(&g, 4, 1, "f").is_ok());
        assert!(f.check(&g, 4, 2, "f").is_err());
        assert!(f.masked(&[true]).check(&g, 4, 1, "f").is_err());
        assert!(Forcing::<f64>::zero().check(&g, 4, 7, "g").is_ok());
    }
}
