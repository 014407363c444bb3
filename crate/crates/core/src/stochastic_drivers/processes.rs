use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coefficient_model::{symmetric_sqrt, CoefficientPath, DriftChoice, Matrix, TimeGrid};
use crate::error::{LabError, Result};
use crate::scalar::Real;

use super::rng::{stream, LABEL_AUXILIARY};
use super::wiener::WienerPath;

/// `d`-dimensional positions at every node of a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPositions<T> {
    dim: usize,
    /// `points[m * d + i]`.
    points: Vec<T>,
}

impl<T: Real> PathPositions<T> {
    pub fn zeros(dim: usize, nodes: usize) -> Self {
        Self {
            dim,
            points: vec![T::zero(); dim * nodes],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn at(&self, m: usize) -> &[T] {
        &self.points[m * self.dim..(m + 1) * self.dim]
    }

    fn at_mut(&mut self, m: usize) -> &mut [T] {
        &mut self.points[m * self.dim..(m + 1) * self.dim]
    }

    /// `x_{t_b} - x_{t_a}`.
    pub fn displacement(&self, a: usize, b: usize) -> Vec<T> {
        self.at(b)
            .iter()
            .zip(self.at(a))
            .map(|(&y, &x)| y - x)
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.points.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Per-interval square roots `σ'_m` with `σ'_m σ'_m = 2 A_m`, where `A` is `a`
/// or `α` according to the caller's choice.
#[derive(Clone, Debug)]
pub struct AuxiliaryDiffusion<T: Real> {
    time: TimeGrid<T>,
    roots: Vec<Matrix<T>>,
}

impl<T: Real> AuxiliaryDiffusion<T> {
    pub fn new(coeffs: &CoefficientPath<T>, choice: DriftChoice) -> Result<Self> {
        let roots = coeffs
            .drift(choice)?
            .iter()
            .map(symmetric_sqrt)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            time: coeffs.time().clone(),
            roots,
        })
    }

    pub fn from_matrices(time: TimeGrid<T>, matrices: &[Matrix<T>]) -> Result<Self> {
        if matrices.len() != time.intervals() {
            return Err(LabError::Shape("one matrix per interval required".into()));
        }
        let roots = matrices
            .iter()
            .map(symmetric_sqrt)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { time, roots })
    }

    pub fn time(&self) -> &TimeGrid<T> {
        &self.time
    }

    pub fn root(&self, m: usize) -> &Matrix<T> {
        &self.roots[m]
    }

    pub fn dim(&self) -> usize {
        self.roots.first().map_or(0, |r| r.rows())
    }

    /// Draws `X'` at the nodes using the stream `(seed, path_index, "aux")`.
    pub fn sample(&self, seed: u64, path_index: u64) -> PathPositions<T> {
        let mut rng = stream(seed, path_index, LABEL_AUXILIARY);
        self.sample_with(&mut rng)
    }

    pub fn sample_with(&self, rng: &mut ChaCha8Rng) -> PathPositions<T> {
        let d = self.dim();
        let m_total = self.time.intervals();
        let mut pos = PathPositions::zeros(d, m_total + 1);
        let mut dw = vec![T::zero(); d];
        for m in 0..m_total {
            let sd = self.time.dt(m).as_f64().sqrt();
            for v in dw.iter_mut() {
                *v = T::lit(sd * rng.sample::<f64, _>(StandardNormal));
            }
            let step = self.roots[m].matvec(&dw);
            let prev = pos.at(m).to_vec();
            for (i, x) in pos.at_mut(m + 1).iter_mut().enumerate() {
                *x = prev[i] + step[i];
            }
        }
        pos
    }
}

/// `X'_t = ∫ σ' dW'` at the nodes for one auxiliary path.
pub fn auxiliary_increments<T: Real>(
    coeffs: &CoefficientPath<T>,
    choice: DriftChoice,
    aux_seed: u64,
    path_index: u64,
) -> Result<PathPositions<T>> {
    Ok(AuxiliaryDiffusion::new(coeffs, choice)?.sample(aux_seed, path_index))
}

/// `x_t^i = Σ_k ∫ σ^{ik} dw^k`, exact for piecewise-constant `σ`.
pub fn shift_process<T: Real>(
    coeffs: &CoefficientPath<T>,
    w: &WienerPath<T>,
) -> Result<PathPositions<T>> {
    if !coeffs.time().same_as(w.time()) {
        return Err(LabError::TimeGrid(
            "coefficients and Wiener path use different grids".into(),
        ));
    }
    if coeffs.drivers() != w.drivers() {
        return Err(LabError::Shape(format!(
            "coefficients have K={} drivers, Wiener path has {}",
            coeffs.drivers(),
            w.drivers()
        )));
    }
    let d = coeffs.dim();
    let m_total = coeffs.intervals();
    let mut pos = PathPositions::zeros(d, m_total + 1);
    for m in 0..m_total {
        let step = coeffs.sigma(m).matvec(w.increments_at(m));
        let prev = pos.at(m).to_vec();
        for (i, x) in pos.at_mut(m + 1).iter_mut().enumerate() {
            *x = prev[i] + step[i];
        }
    }
    Ok(pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient_model::{sample_path, CoefficientFamily};
    use crate::stochastic_drivers::wiener::sample_wiener;

    #[test]
    fn zero_sigma_gives_zero_shift() {
        let t = TimeGrid::uniform(1.0, 5).unwrap();
        let c = sample_path::<f64>(&CoefficientFamily::FullyDegenerate, 2, 3, &t, 0, 0).unwrap();
        let w = sample_wiener(3, &t, 1, 0).unwrap();
        assert_eq!(shift_process(&c, &w).unwrap().max_abs(), 0.0);
        assert_eq!(
            auxiliary_increments(&c, DriftChoice::A, 1, 0)
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn identity_coupling_reproduces_wiener() {
        let t = TimeGrid::uniform(1.0, 7).unwrap();
        let mut s = Matrix::<f64>::zeros(1, 3);
        s[(0, 0)] = 1.0;
        let c = CoefficientPath::constant(t.clone(), Matrix::diagonal(&[0.5]), s, "t").unwrap();
        let w = sample_wiener(3, &t, 2, 0).unwrap();
        let x = shift_process(&c, &w).unwrap();
        let w1 = w.values(0);
        for m in 0..=7 {
            assert!((x.at(m)[0] - w1[m]).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_direct_summation() {
        let t = TimeGrid::uniform(1.0, 20).unwrap();
        let fam = CoefficientFamily::RandomPsd {
            scale: 1.0,
            sigma_scale: 2.0,
            degenerate_prob: 0.3,
        };
        let c = sample_path::<f64>(&fam, 3, 4, &t, 11, 0).unwrap();
        let w = sample_wiener(4, &t, 3, 0).unwrap();
        let x = shift_process(&c, &w).unwrap();
        for i in 0..3 {
            let mut direct = 0.0;
            for m in 0..20 {
                for k in 0..4 {
                    direct += c.sigma(m)[(i, k)] * w.increment(m, k);
                }
            }
            assert!((x.at(20)[i] - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_direction_stays_fixed() {
        let t = TimeGrid::uniform(1.0, 3).unwrap();
        let c =
            CoefficientPath::constant(t, Matrix::diagonal(&[1.0, 0.0]), Matrix::zeros(2, 1), "t")
                .unwrap();
        let aux = AuxiliaryDiffusion::new(&c, DriftChoice::A).unwrap();
        for i in 0..50 {
            let x = aux.sample(1, i);
            assert!((0..=3).all(|m| x.at(m)[1] == 0.0));
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let c = sample_path::<f64>(
            &CoefficientFamily::FullyDegenerate,
            1,
            1,
            &TimeGrid::uniform(1.0, 4).unwrap(),
            0,
            0,
        )
        .unwrap();
        let w = sample_wiener(1, &TimeGrid::uniform(1.0, 5).unwrap(), 0, 0).unwrap();
        assert!(shift_process(&c, &w).is_err());
    }
}
