use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Real;

use super::matrix::{psd_projection, psd_tolerance, smallest_eigenvalue, Matrix};
use super::time_grid::TimeGrid;

/// One realization of the piecewise-constant coefficients `a(t)`, `σ(t)`.
#[derive(Clone, Debug)]
pub struct CoefficientPath<T: Real> {
    time: TimeGrid<T>,
    a: Vec<Matrix<T>>,
    sigma: Vec<Matrix<T>>,
    alpha: Vec<Matrix<T>>,
    alpha_min_eig: Vec<T>,
    dim: usize,
    drivers: usize,
    family: String,
    seed: u64,
}

/// Which matrix drives the second-order term of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftChoice {
    /// `a(t)` itself.
    A,
    /// `α(t) = a(t) - ½ σσᵀ(t)`, PSD-projected.
    Alpha,
}

impl<T: Real> CoefficientPath<T> {
    pub fn new(
        time: TimeGrid<T>,
        a: Vec<Matrix<T>>,
        sigma: Vec<Matrix<T>>,
        family: impl Into<String>,
        seed: u64,
    ) -> Result<Self> {
        let m = time.intervals();
        if a.len() != m || sigma.len() != m {
            return Err(LabError::Shape(format!(
                "{m} intervals but {} a-matrices and {} σ-matrices",
                a.len(),
                sigma.len()
            )));
        }
        let dim = a.first().map_or(0, |x| x.rows());
        let drivers = sigma.first().map_or(0, |x| x.cols());
        if dim == 0 || drivers == 0 {
            return Err(LabError::Shape("need d >= 1 and K >= 1".into()));
        }
        for (i, (ai, si)) in a.iter().zip(&sigma).enumerate() {
            if ai.rows() != dim || ai.cols() != dim || si.rows() != dim || si.cols() != drivers {
                return Err(LabError::Shape(format!(
                    "matrix shapes change at interval {i}"
                )));
            }
            if ai
                .as_slice()
                .iter()
                .chain(si.as_slice())
                .any(|v| !v.is_finite())
            {
                return Err(LabError::NonFinite {
                    what: "coefficients",
                    index: i,
                });
            }
        }
        let a: Vec<Matrix<T>> = a.into_iter().map(|x| x.symmetrized()).collect();
        let alpha: Vec<Matrix<T>> = a
            .iter()
            .zip(&sigma)
            .map(|(ai, si)| ai.sub(&si.gram().scaled(T::lit(0.5))).symmetrized())
            .collect();
        let alpha_min_eig = alpha
            .iter()
            .map(smallest_eigenvalue)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            time,
            a,
            sigma,
            alpha,
            alpha_min_eig,
            dim,
            drivers,
            family: family.into(),
            seed,
        })
    }

    pub fn time(&self) -> &TimeGrid<T> {
        &self.time
    }

    pub fn intervals(&self) -> usize {
        self.time.intervals()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number `K` of driving Wiener processes.
    pub fn drivers(&self) -> usize {
        self.drivers
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn a(&self, m: usize) -> &Matrix<T> {
        &self.a[m]
    }

    pub fn sigma(&self, m: usize) -> &Matrix<T> {
        &self.sigma[m]
    }

    /// `α = a - ½ σσᵀ` on interval `m`, symmetrized, not clamped.
    pub fn alpha_matrix(&self, m: usize) -> &Matrix<T> {
        &self.alpha[m]
    }

    /// Smallest eigenvalue of `α` on interval `m`, floored at zero.
    pub fn delta(&self, m: usize) -> T {
        self.alpha_min_eig[m].max(T::zero())
    }

    pub fn deltas(&self) -> Vec<T> {
        (0..self.intervals()).map(|m| self.delta(m)).collect()
    }

    /// `|σ| = max_i |σ^i|_{l_2}` on interval `m`.
    pub fn sigma_sup(&self, m: usize) -> T {
        self.sigma[m].max_row_norm()
    }

    pub fn has_noise(&self) -> bool {
        self.sigma.iter().any(|s| s.max_abs() != T::zero())
    }

    /// Drift matrices per interval for the chosen reduction.
    pub fn drift(&self, choice: DriftChoice) -> Result<Vec<Matrix<T>>> {
        match choice {
            DriftChoice::A => Ok(self.a.clone()),
            DriftChoice::Alpha => self.alpha.iter().map(psd_projection).collect(),
        }
    }

    /// Same matrices on a grid where each interval is split into `factor` pieces.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        let time = self.time.refine(factor)?;
        let rep = |v: &[Matrix<T>]| -> Vec<Matrix<T>> {
            v.iter()
                .flat_map(|x| std::iter::repeat_n(x.clone(), factor))
                .collect()
        };
        Self::new(
            time,
            rep(&self.a),
            rep(&self.sigma),
            self.family.clone(),
            self.seed,
        )
    }

    /// `a + ε I`, leaving `σ` unchanged (so `δ` becomes `δ + ε`).
    pub fn with_added_identity(&self, eps: T) -> Result<Self> {
        let id = Matrix::identity(self.dim).scaled(eps);
        let a = self.a.iter().map(|x| x.add(&id)).collect();
        Self::new(
            self.time.clone(),
            a,
            self.sigma.clone(),
            self.family.clone(),
            self.seed,
        )
    }

    /// Copy with `σ ≡ 0` and the given second-order matrices.
    pub fn noiseless(time: TimeGrid<T>, a: Vec<Matrix<T>>, family: &str) -> Result<Self> {
        let dim = a.first().map_or(0, |x| x.rows());
        let sigma = vec![Matrix::zeros(dim, 1); a.len()];
        Self::new(time, a, sigma, family, 0)
    }

    /// Constant-in-time coefficients on the given grid.
    pub fn constant(
        time: TimeGrid<T>,
        a: Matrix<T>,
        sigma: Matrix<T>,
        family: &str,
    ) -> Result<Self> {
        let m = time.intervals();
        Self::new(time, vec![a; m], vec![sigma; m], family, 0)
    }

    pub fn weight(&self, kind: WeightKind, p: T, m: usize) -> Result<T> {
        weight_value(kind, p, self.delta(m), self.sigma_sup(m))
    }

    pub fn check_assumptions(&self) -> AssumptionReport {
        let mut min_eig = f64::INFINITY;
        let mut psd = true;
        let mut a_integral = 0.0;
        let mut sigma_sq_integral = 0.0;
        let mut max_a = 0.0f64;
        for m in 0..self.intervals() {
            let l = self.alpha_min_eig[m];
            min_eig = min_eig.min(l.as_f64());
            if l < -psd_tolerance(&self.alpha[m]) {
                psd = false;
            }
            let dt = self.time.dt(m).as_f64();
            let am = self.a[m].max_abs().as_f64();
            max_a = max_a.max(am);
            a_integral += am * dt;
            sigma_sq_integral += self.sigma_sup(m).as_f64().powi(2) * dt;
        }
        let symmetric = self.a.iter().all(|x| x.is_symmetric(T::zero()));
        let integrable = a_integral.is_finite() && sigma_sq_integral.is_finite();
        AssumptionReport {
            min_alpha_eigenvalue: min_eig,
            a_integral,
            sigma_sq_integral,
            max_abs_a: max_a,
            symmetric,
            psd,
            integrable,
            pass: symmetric && psd && integrable,
        }
    }
}

/// Discrete check of the structural assumptions on one path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub min_alpha_eigenvalue: f64,
    /// `Σ_m max_{ij} |a^{ij}_m| Δt_m`.
    pub a_integral: f64,
    /// `Σ_m |σ_m|^2 Δt_m`.
    pub sigma_sq_integral: f64,
    pub max_abs_a: f64,
    pub symmetric: bool,
    pub psd: bool,
    pub integrable: bool,
    pub pass: bool,
}

/// Time weights of the weighted space-time norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Unit,
    Delta,
    /// `δ^{1-p}`.
    DeltaPow1MinusP,
    /// `δ^{1-p/2}`, identically 1 when `p = 2`.
    DeltaPow1MinusHalfP,
    /// `|σ|^p δ^{1-p}`.
    SigmaPowPDeltaPow1MinusP,
    /// `|σ|^p`.
    SigmaPowP,
}

/// Evaluates a weight; `+∞` is returned where `δ = 0` makes a negative power blow up.
pub fn weight_value<T: Real>(kind: WeightKind, p: T, delta: T, sigma_sup: T) -> Result<T> {
    if !(p >= T::lit(2.0)) {
        return Err(LabError::InvalidParameter(format!(
            "weights need p >= 2, got {p}"
        )));
    }
    let inv_pow = |e: T| -> T {
        if e == T::zero() {
            T::one()
        } else if delta == T::zero() {
            T::infinity()
        } else {
            delta.powf(e)
        }
    };
    Ok(match kind {
        WeightKind::Unit => T::one(),
        WeightKind::Delta => delta,
        WeightKind::DeltaPow1MinusP => inv_pow(T::one() - p),
        WeightKind::DeltaPow1MinusHalfP => inv_pow(T::one() - p / T::lit(2.0)),
        WeightKind::SigmaPowPDeltaPow1MinusP => {
            let s = sigma_sup.powf(p);
            if s == T::zero() {
                T::zero()
            } else {
                s * inv_pow(T::one() - p)
            }
        }
        WeightKind::SigmaPowP => sigma_sup.powf(p),
    })
}

/// `weight · integrand` with `0 · ∞ := 0`.
#[inline]
pub fn weighted_contribution<T: Real>(weight: T, integrand: T) -> T {
    if integrand == T::zero() || weight == T::zero() {
        T::zero()
    } else {
        weight * integrand
    }
}

/// JSON layout of a coefficient path file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientPathFile {
    pub time: Vec<f64>,
    pub d: usize,
    #[serde(rename = "K")]
    pub drivers: usize,
    /// Row-major `d×d` matrix per interval.
    pub a: Vec<Vec<f64>>,
    /// Row-major `d×K` matrix per interval.
    pub sigma: Vec<Vec<f64>>,
    pub family: String,
    pub seed: u64,
}

impl<T: Real> CoefficientPath<T> {
    pub fn to_file(&self) -> CoefficientPathFile {
        CoefficientPathFile {
            time: self.time.nodes().iter().map(|t| t.as_f64()).collect(),
            d: self.dim,
            drivers: self.drivers,
            a: self
                .a
                .iter()
                .map(|x| x.as_slice().iter().map(|v| v.as_f64()).collect())
                .collect(),
            sigma: self
                .sigma
                .iter()
                .map(|x| x.as_slice().iter().map(|v| v.as_f64()).collect())
                .collect(),
            family: self.family.clone(),
            seed: self.seed,
        }
    }

    pub fn from_file(file: &CoefficientPathFile) -> Result<Self> {
        let time = TimeGrid::new(file.time.iter().map(|&t| T::lit(t)).collect())?;
        let conv = |rows, cols, v: &Vec<Vec<f64>>| -> Result<Vec<Matrix<T>>> {
            v.iter()
                .map(|x| Matrix::from_row_major(rows, cols, x.iter().map(|&e| T::lit(e)).collect()))
                .collect()
        };
        Self::new(
            time,
            conv(file.d, file.d, &file.a)?,
            conv(file.d, file.drivers, &file.sigma)?,
            file.family.clone(),
            file.seed,
        )
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let file: CoefficientPathFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_file(&file)
    }
}
