use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::stochastic_drivers::rng::{stream, LABEL_COEFFICIENTS};

use super::matrix::Matrix;
use super::path::CoefficientPath;
use super::time_grid::TimeGrid;

fn default_period() -> usize {
    2
}

fn default_one() -> f64 {
    1.0
}

/// Named generators of coefficient paths.
///
/// Every family builds `α` first and sets `a = α + ½ σσᵀ`, so sampled paths
/// satisfy the PSD condition by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum CoefficientFamily {
    /// `α = (κ/2) I`, `σ` diagonal with entry `sigma`.
    ConstantElliptic {
        kappa: f64,
        #[serde(default)]
        sigma: f64,
    },
    /// `α = (κ/2) I` on intervals whose midpoint lies in `[window[0], window[1])`, zero elsewhere.
    DegenerateWindow {
        kappa: f64,
        window: [f64; 2],
        #[serde(default)]
        sigma: f64,
    },
    /// `α` loses one rank (the last axis) on every `period`-th interval.
    VanishingEigenvalue {
        kappa: f64,
        #[serde(default = "default_period")]
        period: usize,
        #[serde(default)]
        sigma: f64,
    },
    /// `a = s(t) I` with `s` the interval average of `c t^{-θ}`; `σ = sigma_frac √s` on the diagonal.
    UnboundedIntegrable {
        c: f64,
        theta: f64,
        #[serde(default)]
        sigma_frac: f64,
        /// When set, the sampled `max |a|` must exceed this level.
        #[serde(default)]
        level: Option<f64>,
    },
    FullyDegenerate,
    /// Wishart-style draws: `α = scale · B Bᵀ / d` with `B` Gaussian `d×r`, where the
    /// rank `r < d` with probability `degenerate_prob`; `σ` Gaussian scaled by `sigma_scale/√K`.
    RandomPsd {
        #[serde(default = "default_one")]
        scale: f64,
        #[serde(default)]
        sigma_scale: f64,
        #[serde(default)]
        degenerate_prob: f64,
    },
}

impl CoefficientFamily {
    /// Parameter names accepted by the family with the given tag; `None` for unknown tags.
    pub fn param_names(tag: &str) -> Option<&'static [&'static str]> {
        Some(match tag {
            "constant_elliptic" => &["kappa", "sigma"],
            "degenerate_window" => &["kappa", "window", "sigma"],
            "vanishing_eigenvalue" => &["kappa", "period", "sigma"],
            "unbounded_integrable" => &["c", "theta", "sigma_frac", "level"],
            "fully_degenerate" => &[],
            "random_psd" => &["scale", "sigma_scale", "degenerate_prob"],
            _ => return None,
        })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::ConstantElliptic { .. } => "constant_elliptic",
            Self::DegenerateWindow { .. } => "degenerate_window",
            Self::VanishingEigenvalue { .. } => "vanishing_eigenvalue",
            Self::UnboundedIntegrable { .. } => "unbounded_integrable",
            Self::FullyDegenerate => "fully_degenerate",
            Self::RandomPsd { .. } => "random_psd",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidParameter(format!("{}: {msg}", self.tag())));
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        match *self {
            Self::ConstantElliptic { kappa, sigma }
            | Self::VanishingEigenvalue { kappa, sigma, .. } => {
                if !finite_nonneg(kappa) || !sigma.is_finite() {
                    return bad(format!("kappa={kappa}, sigma={sigma}"));
                }
                if let Self::VanishingEigenvalue { period: 0, .. } = self {
                    return bad("period must be >= 1".into());
                }
            }
            Self::DegenerateWindow {
                kappa,
                window,
                sigma,
            } => {
                if !finite_nonneg(kappa) || !sigma.is_finite() || !(window[0] < window[1]) {
                    return bad(format!("kappa={kappa}, window={window:?}"));
                }
            }
            Self::UnboundedIntegrable {
                c,
                theta,
                sigma_frac,
                ..
            } => {
                if !finite_nonneg(c) || !(0.0..1.0).contains(&theta) {
                    return bad(format!(
                        "need c >= 0 and 0 <= theta < 1, got c={c}, theta={theta}"
                    ));
                }
                if !(0.0..=std::f64::consts::SQRT_2).contains(&sigma_frac) {
                    return bad(format!("sigma_frac={sigma_frac} would make α negative"));
                }
            }
            Self::FullyDegenerate => {}
            Self::RandomPsd {
                scale,
                sigma_scale,
                degenerate_prob,
            } => {
                if !finite_nonneg(scale)
                    || !sigma_scale.is_finite()
                    || !(0.0..=1.0).contains(&degenerate_prob)
                {
                    return bad(format!(
                        "scale={scale}, sigma_scale={sigma_scale}, degenerate_prob={degenerate_prob}"
                    ));
                }
            }
        }
        Ok(())
    }
}

fn diagonal_sigma(d: usize, k: usize, value: f64) -> Matrix<f64> {
    let mut s = Matrix::zeros(d, k);
    for i in 0..d.min(k) {
        s[(i, i)] = value;
    }
    s
}

/// Draws one coefficient path; deterministic in `(seed, path_index)`.
pub fn sample_path<T: Real>(
    family: &CoefficientFamily,
    d: usize,
    drivers: usize,
    time: &TimeGrid<T>,
    seed: u64,
    path_index: u64,
) -> Result<CoefficientPath<T>> {
    family.validate()?;
    if drivers == 0 || d == 0 {
        return Err(LabError::InvalidParameter("need d >= 1 and K >= 1".into()));
    }
    let intervals = time.intervals();
    let mut alphas: Vec<Matrix<f64>> = Vec::with_capacity(intervals);
    let mut sigmas: Vec<Matrix<f64>> = Vec::with_capacity(intervals);
    let mid = |m: usize| 0.5 * (time.node(m).as_f64() + time.node(m + 1).as_f64());
    match *family {
        CoefficientFamily::ConstantElliptic { kappa, sigma } => {
            for _ in 0..intervals {
                alphas.push(Matrix::identity(d).scaled(0.5 * kappa));
                sigmas.push(diagonal_sigma(d, drivers, sigma));
            }
        }
        CoefficientFamily::DegenerateWindow {
            kappa,
            window,
            sigma,
        } => {
            for m in 0..intervals {
                let t = mid(m);
                let on = t >= window[0] && t < window[1];
                alphas.push(Matrix::identity(d).scaled(if on { 0.5 * kappa } else { 0.0 }));
                sigmas.push(diagonal_sigma(d, drivers, sigma));
            }
        }
        CoefficientFamily::VanishingEigenvalue {
            kappa,
            period,
            sigma,
        } => {
            for m in 0..intervals {
                let mut diag = vec![0.5 * kappa; d];
                if m % period == 0 {
                    diag[d - 1] = 0.0;
                }
                alphas.push(Matrix::diagonal(&diag));
                sigmas.push(diagonal_sigma(d, drivers, sigma));
            }
        }
        CoefficientFamily::UnboundedIntegrable {
            c,
            theta,
            sigma_frac,
            level,
        } => {
            let antideriv = |t: f64| c * t.powf(1.0 - theta) / (1.0 - theta);
            let mut max_s = 0.0f64;
            for m in 0..intervals {
                let (t0, t1) = (time.node(m).as_f64(), time.node(m + 1).as_f64());
                let s = if t1 > t0 {
                    (antideriv(t1) - antideriv(t0)) / (t1 - t0)
                } else {
                    c * t0.max(f64::MIN_POSITIVE).powf(-theta)
                };
                max_s = max_s.max(s);
                let mut diag = vec![s; d];
                for v in diag.iter_mut().take(d.min(drivers)) {
                    *v = s * (1.0 - 0.5 * sigma_frac * sigma_frac);
                }
                alphas.push(Matrix::diagonal(&diag));
                sigmas.push(diagonal_sigma(d, drivers, sigma_frac * s.sqrt()));
            }
            if let Some(level) = level {
                if max_s <= level {
                    return Err(LabError::InvalidParameter(format!(
                        "unbounded_integrable: max |a| = {max_s} does not exceed level {level}; refine the time grid"
                    )));
                }
            }
        }
        CoefficientFamily::FullyDegenerate => {
            for _ in 0..intervals {
                alphas.push(Matrix::zeros(d, d));
                sigmas.push(Matrix::zeros(d, drivers));
            }
        }
        CoefficientFamily::RandomPsd {
            scale,
            sigma_scale,
            degenerate_prob,
        } => {
            let mut rng = stream(seed, path_index, LABEL_COEFFICIENTS);
            for _ in 0..intervals {
                let rank = if degenerate_prob > 0.0 && rng.random::<f64>() < degenerate_prob {
                    rng.random_range(0..d)
                } else {
                    d
                };
                let b: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
                let mut b = Matrix::from_row_major(d, d, b)?;
                for i in 0..d {
                    for j in rank..d {
                        b[(i, j)] = 0.0;
                    }
                }
                alphas.push(b.gram().scaled(scale / d as f64));
                let s: Vec<f64> = (0..d * drivers)
                    .map(|_| {
                        sigma_scale / (drivers as f64).sqrt() * rng.sample::<f64, _>(StandardNormal)
                    })
                    .collect();
                sigmas.push(Matrix::from_row_major(d, drivers, s)?);
            }
        }
    }
    let a: Vec<Matrix<T>> = alphas
        .iter()
        .zip(&sigmas)
        .map(|(al, s)| al.add(&s.gram().scaled(0.5)).cast())
        .collect();
    let sigma = sigmas.iter().map(|s| s.cast()).collect();
    CoefficientPath::new(time.clone(), a, sigma, family.tag(), seed)
}
