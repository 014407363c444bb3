use rand::Rng;
use rand_distr::StandardNormal;

use crate::coefficient_model::TimeGrid;
use crate::error::{LabError, Result};
use crate::scalar::Real;

use super::rng::{stream, LABEL_WIENER};

/// Increments `Δw^k_m` of `K` independent Wiener processes on a time grid.
#[derive(Clone, Debug)]
pub struct WienerPath<T: Real> {
    time: TimeGrid<T>,
    drivers: usize,
    /// `increments[m * K + k]`.
    increments: Vec<T>,
    seed: u64,
    path_index: u64,
}

impl<T: Real> WienerPath<T> {
    pub fn from_increments(time: TimeGrid<T>, drivers: usize, increments: Vec<T>) -> Result<Self> {
        if drivers == 0 || increments.len() != drivers * time.intervals() {
            return Err(LabError::Shape(format!(
                "expected {} x {drivers} increments, got {}",
                time.intervals(),
                increments.len()
            )));
        }
        Ok(Self {
            time,
            drivers,
            increments,
            seed: 0,
            path_index: 0,
        })
    }

    pub fn time(&self) -> &TimeGrid<T> {
        &self.time
    }

    pub fn drivers(&self) -> usize {
        self.drivers
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn increment(&self, m: usize, k: usize) -> T {
        self.increments[m * self.drivers + k]
    }

    /// All `K` increments over interval `m`.
    pub fn increments_at(&self, m: usize) -> &[T] {
        &self.increments[m * self.drivers..(m + 1) * self.drivers]
    }

    /// `w^k` at every node.
    pub fn values(&self, k: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(self.time.intervals() + 1);
        let mut acc = T::zero();
        out.push(acc);
        for m in 0..self.time.intervals() {
            acc = acc + self.increment(m, k);
            out.push(acc);
        }
        out
    }

    pub fn terminal(&self, k: usize) -> T {
        (0..self.time.intervals())
            .map(|m| self.increment(m, k))
            .sum()
    }

    /// Sums blocks of `factor` consecutive increments; the grid keeps every
    /// `factor`-th node.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let m = self.time.intervals();
        if factor == 0 || !m.is_multiple_of(factor) {
            return Err(LabError::TimeGrid(format!(
                "cannot coarsen {m} intervals by {factor}"
            )));
        }
        let nodes = self.time.nodes().iter().step_by(factor).copied().collect();
        let time = TimeGrid::new(nodes)?;
        let mut increments = vec![T::zero(); (m / factor) * self.drivers];
        for j in 0..m {
            for k in 0..self.drivers {
                let slot = &mut increments[(j / factor) * self.drivers + k];
                *slot = *slot + self.increment(j, k);
            }
        }
        Ok(Self {
            time,
            drivers: self.drivers,
            increments,
            seed: self.seed,
            path_index: self.path_index,
        })
    }
}

/// Gaussian increments `N(0, Δt_m)` from the stream `(seed, path_index, "w")`.
pub fn sample_wiener<T: Real>(
    drivers: usize,
    time: &TimeGrid<T>,
    seed: u64,
    path_index: u64,
) -> Result<WienerPath<T>> {
    if drivers == 0 {
        return Err(LabError::InvalidParameter(
            "need K >= 1 Wiener processes".into(),
        ));
    }
    let mut rng = stream(seed, path_index, LABEL_WIENER);
    let mut increments = Vec::with_capacity(drivers * time.intervals());
    for m in 0..time.intervals() {
        let sd = time.dt(m).as_f64().sqrt();
        for _ in 0..drivers {
            let z: f64 = rng.sample(StandardNormal);
            increments.push(T::lit(sd * z));
        }
    }
    Ok(WienerPath {
        time: time.clone(),
        drivers,
        increments,
        seed,
        path_index,
    })
}

/// Path on `coarse.refine(substeps)`; [`WienerPath::coarsen`] recovers
/// consistent increments for any divisor of `substeps`.
pub fn sample_wiener_refined<T: Real>(
    drivers: usize,
    coarse: &TimeGrid<T>,
    substeps: usize,
    seed: u64,
    path_index: u64,
) -> Result<WienerPath<T>> {
    sample_wiener(drivers, &coarse.refine(substeps)?, seed, path_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_length_interval_has_zero_increment() {
        let t = TimeGrid::new(vec![0.0, 0.5, 0.5, 1.0]).unwrap();
        let w = sample_wiener(3, &t, 4, 0).unwrap();
        assert!(w.increments_at(1).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn deterministic_in_seed_and_index() {
        let t = TimeGrid::uniform(1.0, 10).unwrap();
        let a = sample_wiener::<f64>(2, &t, 9, 3).unwrap();
        let b = sample_wiener::<f64>(2, &t, 9, 3).unwrap();
        let c = sample_wiener::<f64>(2, &t, 9, 4).unwrap();
        assert_eq!(a.increments, b.increments);
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn terminal_moments() {
        let t = TimeGrid::uniform(1.0, 4).unwrap();
        let n = 100_000;
        let ends: Vec<f64> = (0..n)
            .map(|i| sample_wiener(1, &t, 1, i).unwrap().terminal(0))
            .collect();
        let mean = ends.iter().sum::<f64>() / n as f64;
        let var = ends.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn coarsening_preserves_node_values() {
        let t = TimeGrid::uniform(2.0, 3).unwrap();
        let fine = sample_wiener_refined::<f64>(2, &t, 8, 5, 1).unwrap();
        let mid = fine.coarsen(4).unwrap();
        let coarse = fine.coarsen(8).unwrap();
        assert!(coarse.time().same_as(&t));
        let vf = fine.values(1);
        let vm = mid.values(1);
        let vc = coarse.values(1);
        for j in 0..=3 {
            assert!((vf[8 * j] - vc[j]).abs() < 1e-14);
            assert!((vm[2 * j] - vc[j]).abs() < 1e-14);
        }
        assert!(fine.coarsen(5).is_err());
    }
}
