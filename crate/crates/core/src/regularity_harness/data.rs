use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coefficient_model::CoefficientPath;
use crate::error::{LabError, Result};
use crate::pde_solver::Forcing;
use crate::spde_solver::SpdeData;
use crate::spectral_grid::io::load_field;
use crate::spectral_grid::{Grid, GridField, Spectrum};
use crate::stochastic_drivers::rng::{stream, LABEL_DATA};

use super::config::ExperimentConfig;

/// Intervals with `δ` at or below this count as degenerate when masking data.
pub const DEGENERACY_FLOOR: f64 = 1e-9;

fn one() -> f64 {
    1.0
}

/// Named generators for initial data and free terms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    #[default]
    Zero,
    /// `amplitude · cos(k·x·2π/L + phase)` with integer wavenumbers `k`.
    Mode {
        wavenumber: Vec<i64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Periodized Gaussian bump centred in the box.
    Gaussian {
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Random trigonometric polynomial with `|k|_∞ ≤ kmax`, Gaussian
    /// coefficients decaying like `(1+|k|²)^{-1}`, scaled to RMS `amplitude`.
    RandomBand {
        kmax: u32,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Field file written by `save_field`.
    File { path: String },
}

impl FieldSpec {
    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// Samples the generator; `salt` separates otherwise identical random draws.
    pub fn build(
        &self,
        grid: &Grid<f64>,
        cfg: Option<&ExperimentConfig>,
        salt: u64,
    ) -> Result<GridField<f64>> {
        let d = grid.dim();
        let bad = |msg: String| Err(LabError::InvalidParameter(msg));
        match self {
            Self::Zero => Ok(GridField::zeros(grid.clone(), 1)),
            Self::Mode {
                wavenumber,
                amplitude,
                phase,
            } => {
                if wavenumber.len() != d {
                    return bad(format!(
                        "mode: wavenumber has {} entries, grid d={d}",
                        wavenumber.len()
                    ));
                }
                let half = (grid.n() / 2) as i64;
                if wavenumber.iter().any(|k| k.abs() >= half) {
                    return bad(format!(
                        "mode: wavenumber {wavenumber:?} not below Nyquist {half}"
                    ));
                }
                let step = grid.frequency_step();
                GridField::from_fn(grid.clone(), |x| {
                    let arg: f64 = wavenumber
                        .iter()
                        .zip(x)
                        .map(|(&k, &xi)| k as f64 * step * xi)
                        .sum();
                    amplitude * (arg + phase).cos()
                })
            }
            Self::Gaussian { width, amplitude } => {
                if !(*width > 0.0) {
                    return bad(format!("gaussian: width must be positive, got {width}"));
                }
                let l = grid.length();
                GridField::from_fn(grid.clone(), |x| {
                    let r2: f64 = x[..d].iter().map(|&c| (c - l / 2.0).powi(2)).sum();
                    amplitude * (-r2 / (2.0 * width * width)).exp()
                })
            }
            Self::RandomBand {
                kmax,
                amplitude,
                seed,
            } => {
                let kmax = *kmax as i64;
                if kmax == 0 || kmax >= (grid.n() / 2) as i64 {
                    return bad(format!("random_band: need 1 ≤ kmax < n/2, got {kmax}"));
                }
                let mut rng = stream(*seed, salt, LABEL_DATA);
                let mut coeffs = vec![Complex::new(0.0, 0.0); grid.len()];
                for (mode, c) in coeffs.iter_mut().enumerate() {
                    let k = grid.integer_wavenumbers(mode);
                    if k[..d].iter().all(|&ki| ki.abs() <= kmax) {
                        let decay = 1.0 / (1.0 + grid.norm_sq(mode));
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        *c = Complex::new(re, im) * decay;
                    }
                }
                let raw = Spectrum::new(grid.clone(), coeffs, 1)?
                    .inverse()
                    .real_parts();
                let rms = (raw.iter().map(|v| v * v).sum::<f64>() / raw.len() as f64).sqrt();
                GridField::from_real(
                    grid.clone(),
                    raw.iter().map(|v| amplitude * v / rms).collect(),
                )
            }
            Self::File { path } => {
                let resolved = cfg.map_or_else(|| path.into(), |c| c.resolve(path));
                let field: GridField<f64> = load_field(&resolved)?;
                if field.grid() != grid || field.arity() != 1 {
                    return bad(format!(
                        "{}: field does not match the configured grid",
                        resolved.display()
                    ));
                }
                Ok(field)
            }
        }
    }
}

fn window_mask(coeffs: &CoefficientPath<f64>, window: Option<[f64; 2]>) -> Vec<bool> {
    let time = coeffs.time();
    (0..time.intervals())
        .map(|m| {
            let mid = 0.5 * (time.node(m) + time.node(m + 1));
            window.is_none_or(|[a, b]| a <= mid && mid < b)
        })
        .collect()
}

/// `u0`, `f` and the `K`-vector `g` of a config, gated by the time windows and
/// (optionally) by a lower bound on `δ` along the given coefficient path.
pub fn build_data(
    cfg: &ExperimentConfig,
    grid: &Grid<f64>,
    coeffs: &CoefficientPath<f64>,
) -> Result<SpdeData<f64>> {
    let d = &cfg.data;
    let u0 = d.u0.build(grid, Some(cfg), 0)?;
    let mut f_keep = window_mask(coeffs, d.f_window);
    let mut g_keep = window_mask(coeffs, d.g_window);
    if let Some(level) = d.mask_delta_below {
        for m in 0..coeffs.intervals() {
            if coeffs.delta(m) <= level.max(DEGENERACY_FLOOR) {
                f_keep[m] = false;
                g_keep[m] = false;
            }
        }
    }
    let f = if d.f.is_zero() {
        Forcing::zero()
    } else {
        Forcing::from_field(&d.f.build(grid, Some(cfg), 1)?).masked(&f_keep)
    };
    let g = if d.g.iter().all(FieldSpec::is_zero) {
        Forcing::zero()
    } else {
        let mut parts = Vec::with_capacity(coeffs.drivers());
        for k in 0..coeffs.drivers() {
            parts.push(match d.g.get(k) {
                Some(spec) => spec.build(grid, Some(cfg), 2 + k as u64)?,
                None => GridField::zeros(grid.clone(), 1),
            });
        }
        Forcing::from_field(&GridField::stack(&parts)?).masked(&g_keep)
    };
    Ok(SpdeData::new(u0.forward()).with_f(f).with_g(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient_model::{Matrix, TimeGrid};
    use crate::spectral_grid::io::save_field;
    use crate::spectral_grid::lp_norm;
    use std::f64::consts::TAU;

    #[test]
    fn mode_generator() {
        let g = Grid::new(2, 16, TAU).unwrap();
        let spec = FieldSpec::Mode {
            wavenumber: vec![1, 2],
            amplitude: 2.0,
            phase: 0.0,
        };
        let u = spec.build(&g, None, 0).unwrap();
        let want = GridField::from_fn(g.clone(), |x| 2.0 * (x[0] + 2.0 * x[1]).cos()).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-14);
        let short = FieldSpec::Mode {
            wavenumber: vec![1],
            amplitude: 1.0,
            phase: 0.0,
        };
        assert!(short.build(&g, None, 0).is_err());
        let nyq = FieldSpec::Mode {
            wavenumber: vec![8, 0],
            amplitude: 1.0,
            phase: 0.0,
        };
        assert!(nyq.build(&g, None, 0).is_err());
    }

    #[test]
    fn random_band_is_reproducible_and_band_limited() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let spec = FieldSpec::RandomBand {
            kmax: 3,
            amplitude: 1.5,
            seed: 4,
        };
        let a = spec.build(&g, None, 7).unwrap();
        assert_eq!(a.values(), spec.build(&g, None, 7).unwrap().values());
        assert_ne!(a.values(), spec.build(&g, None, 8).unwrap().values());
        let s = a.forward();
        for m in 0..g.len() {
            if g.integer_wavenumbers(m)[0].abs() > 3 {
                assert!(s.coeffs()[m].norm() < 1e-12);
            }
        }
        let rms = lp_norm(&a, 2.0).unwrap() / TAU.sqrt();
        assert!((rms - 1.5).abs() < 1e-12);
    }

    #[test]
    fn file_generator_round_trip() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let u = GridField::from_fn(g.clone(), |x| x[0].sin()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.field");
        save_field(&u, &path).unwrap();
        let spec = FieldSpec::File {
            path: path.to_string_lossy().into(),
        };
        assert_eq!(spec.build(&g, None, 0).unwrap().values(), u.values());
        let other = Grid::new(1, 32, TAU).unwrap();
        assert!(spec.build(&other, None, 0).is_err());
    }

    #[test]
    fn windows_and_degeneracy_mask_forcing() {
        let g = Grid::new(1, 16, TAU).unwrap();
        let t = TimeGrid::uniform(1.0, 4).unwrap();
        let a = vec![
            Matrix::diagonal(&[1.0]),
            Matrix::diagonal(&[0.0]),
            Matrix::diagonal(&[1.0]),
            Matrix::diagonal(&[1.0]),
        ];
        let c = CoefficientPath::noiseless(t, a, "x").unwrap();
        let mut cfg = ExperimentConfig::with_family(
            &crate::coefficient_model::CoefficientFamily::FullyDegenerate,
            1,
        );
        cfg.data.f = FieldSpec::Mode {
            wavenumber: vec![1],
            amplitude: 1.0,
            phase: 0.0,
        };
        cfg.data.g = vec![FieldSpec::Mode {
            wavenumber: vec![2],
            amplitude: 1.0,
            phase: 0.0,
        }];
        cfg.data.f_window = Some([0.0, 0.7]);
        cfg.data.mask_delta_below = Some(0.0);
        let data = build_data(&cfg, &g, &c).unwrap();
        let f_on: Vec<bool> = (0..4).map(|m| !data.f.vanishes_on(m)).collect();
        let g_on: Vec<bool> = (0..4).map(|m| !data.g.vanishes_on(m)).collect();
        assert_eq!(f_on, [true, false, true, false]);
        assert_eq!(g_on, [true, false, true, true]);
    }
}
