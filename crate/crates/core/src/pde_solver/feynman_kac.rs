use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::coefficient_model::{CoefficientPath, DriftChoice};
use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::spectral_grid::{translation_symbol, GridField, Spectrum};
use crate::stochastic_drivers::rng::{stream, LABEL_AUXILIARY, LABEL_QUADRATURE};
use crate::stochastic_drivers::{AuxiliaryDiffusion, WienerPath};

use super::Forcing;

/// Fewer paths than this give meaningless error bars.
pub const MIN_ORACLE_PATHS: usize = 100;

const CHUNK: usize = 64;

/// Pointwise Monte-Carlo estimate with its standard error.
#[derive(Clone, Debug)]
pub struct MonteCarloField<T: Real> {
    pub mean: GridField<T>,
    /// Standard error of the mean at every grid point (real and imaginary
    /// parts combined).
    pub stderr: Vec<T>,
    pub paths: usize,
}

impl<T: Real> MonteCarloField<T> {
    /// Largest `|estimate - reference| / stderr` over the grid; points with
    /// zero error bar count only if they disagree.
    pub fn max_z_score(&self, reference: &GridField<T>) -> T {
        self.mean
            .values()
            .iter()
            .zip(reference.values())
            .zip(&self.stderr)
            .fold(T::zero(), |acc, ((a, b), &se)| {
                let gap = (a - b).norm();
                let z = if se > T::zero() {
                    gap / se
                } else if gap > T::lit(1e-12) {
                    T::infinity()
                } else {
                    T::zero()
                };
                acc.max(z)
            })
    }
}

#[derive(Clone)]
struct Moments<T> {
    count: usize,
    mean: Vec<Complex<T>>,
    m2: Vec<T>,
}

impl<T: Real> Moments<T> {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean: vec![Complex::new(T::zero(), T::zero()); n],
            m2: vec![T::zero(); n],
        }
    }

    fn push(&mut self, sample: &[Complex<T>]) {
        self.count += 1;
        let c = T::from_usize_lossy(self.count);
        for ((mu, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(sample) {
            let delta = x - *mu;
            *mu = *mu + delta / c;
            let after = x - *mu;
            *m2 = *m2 + delta.re * after.re + delta.im * after.im;
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other.clone();
        }
        let (na, nb) = (
            T::from_usize_lossy(self.count),
            T::from_usize_lossy(other.count),
        );
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] = self.mean[i] + delta * (nb / n);
            self.m2[i] = self.m2[i] + other.m2[i] + delta.norm_sqr() * na * nb / n;
        }
        self.count += other.count;
        self
    }
}

/// Monte-Carlo evaluation of
/// `E'[u_0(x + X'_T)] + ∫ E'[f(s, x + X'_T - X'_s)] ds + ∫ E'[g^k(s, x + X'_T - X'_s)] dw^k_s`
/// with `σ'σ' = 2a`. The `ds` integral draws one uniform time per interval and
/// bridges `X'` to it, which keeps the estimator unbiased.
pub(crate) fn representation_estimate<T: Real>(
    u0: &Spectrum<T>,
    f: &Forcing<T>,
    noise: Option<(&Forcing<T>, &WienerPath<T>)>,
    coeffs: &CoefficientPath<T>,
    n_paths: usize,
    aux_seed: u64,
) -> Result<MonteCarloField<T>> {
    if n_paths < MIN_ORACLE_PATHS {
        return Err(LabError::InvalidParameter(format!(
            "Monte-Carlo oracle needs at least {MIN_ORACLE_PATHS} paths, got {n_paths}"
        )));
    }
    let grid = u0.grid().clone();
    let time = coeffs.time();
    let m_total = time.intervals();
    f.check(&grid, m_total, 1, "f")?;
    if let Some((g, w)) = noise {
        if !w.time().same_as(time) {
            return Err(LabError::TimeGrid(
                "Wiener path and coefficients use different time grids".into(),
            ));
        }
        g.check(&grid, m_total, w.drivers(), "g")?;
    }
    let aux = AuxiliaryDiffusion::new(coeffs, DriftChoice::A)?;
    let d = grid.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let modes: Vec<usize> = (0..grid.len())
        .filter(|&m| {
            u0.coeffs()[m] != zero
                || f.touches_mode(m)
                || noise.is_some_and(|(g, _)| g.touches_mode(m))
        })
        .collect();

    let one_path = |j: usize| -> Result<Vec<Complex<T>>> {
        let x = aux.sample_with(&mut stream(aux_seed, j as u64, LABEL_AUXILIARY));
        let mut quad = stream(aux_seed, j as u64, LABEL_QUADRATURE);
        let end = x.at(m_total).to_vec();
        let mut inner: Vec<Vec<T>> = Vec::with_capacity(m_total);
        for m in 0..m_total {
            let u: f64 = quad.random();
            let dt = time.dt(m).as_f64();
            let spread = (u * (1.0 - u) * dt).sqrt();
            let z: Vec<T> = (0..d)
                .map(|_| T::lit(spread * quad.sample::<f64, _>(StandardNormal)))
                .collect();
            let bridge = aux.root(m).matvec(&z);
            let (a, b) = (x.at(m), x.at(m + 1));
            inner.push(
                (0..d)
                    .map(|i| end[i] - (a[i] + T::lit(u) * (b[i] - a[i]) + bridge[i]))
                    .collect(),
            );
        }
        let mut coeffs_out = vec![zero; grid.len()];
        for &mode in &modes {
            let mut acc = u0.coeffs()[mode] * translation_symbol(&grid, mode, &end);
            for (m, lag) in inner.iter().enumerate() {
                let fm = f.coeff(m, 0, mode);
                if fm != zero {
                    acc = acc + fm * translation_symbol(&grid, mode, lag) * time.dt(m);
                }
            }
            if let Some((g, w)) = noise {
                for m in 0..m_total {
                    let mut stoch = zero;
                    for k in 0..w.drivers() {
                        stoch = stoch + g.coeff(m, k, mode) * w.increment(m, k);
                    }
                    if stoch != zero {
                        let lag: Vec<T> = (0..d).map(|i| end[i] - x.at(m)[i]).collect();
                        acc = acc + stoch * translation_symbol(&grid, mode, &lag);
                    }
                }
            }
            coeffs_out[mode] = acc;
        }
        Ok(Spectrum::new(grid.clone(), coeffs_out, 1)?
            .inverse()
            .into_values())
    };

    let chunks = (0..n_paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut mom = Moments::new(grid.len());
            for j in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                mom.push(&one_path(j)?);
            }
            Ok(mom)
        })
        .collect::<Result<Vec<Moments<T>>>>()?;
    let total = chunks
        .iter()
        .fold(Moments::new(grid.len()), |acc, m| acc.merge(m));
    let n = T::from_usize_lossy(n_paths);
    let stderr = total
        .m2
        .iter()
        .map(|&m2| (m2.max(T::zero()) / (n - T::one()) / n).sqrt())
        .collect();
    Ok(MonteCarloField {
        mean: GridField::new(grid, total.mean, 1)?,
        stderr,
        paths: n_paths,
    })
}

/// `u(T, ·)` of the deterministic equation as an average over auxiliary
/// paths `X'` with `σ'σ' = 2a`.
pub fn feynman_kac_oracle<T: Real>(
    u0: &Spectrum<T>,
    f: &Forcing<T>,
    coeffs: &CoefficientPath<T>,
    n_paths: usize,
    aux_seed: u64,
) -> Result<MonteCarloField<T>> {
    representation_estimate(u0, f, None, coeffs, n_paths, aux_seed)
}
