use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Nodes `0 = t_0 ≤ t_1 ≤ … ≤ t_M = T`. Zero-length intervals are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid<T> {
    nodes: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(LabError::TimeGrid("need at least one interval".into()));
        }
        if nodes[0] != T::zero() {
            return Err(LabError::TimeGrid(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        for (m, w) in nodes.windows(2).enumerate() {
            if !w[1].is_finite() || w[1] < w[0] {
                return Err(LabError::TimeGrid(format!(
                    "nodes not nondecreasing at interval {m}"
                )));
            }
        }
        Ok(Self { nodes })
    }

    pub fn uniform(horizon: T, intervals: usize) -> Result<Self> {
        if intervals == 0 || !(horizon > T::zero()) {
            return Err(LabError::TimeGrid(format!(
                "uniform grid needs T > 0 and M >= 1, got T={horizon}, M={intervals}"
            )));
        }
        let m = T::from_usize_lossy(intervals);
        let mut nodes: Vec<T> = (0..=intervals)
            .map(|i| horizon * T::from_usize_lossy(i) / m)
            .collect();
        nodes[intervals] = horizon;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, m: usize) -> T {
        self.nodes[m]
    }

    pub fn dt(&self, m: usize) -> T {
        self.nodes[m + 1] - self.nodes[m]
    }

    pub fn horizon(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// Splits each interval into `factor` equal pieces.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(LabError::TimeGrid("refinement factor must be >= 1".into()));
        }
        let f = T::from_usize_lossy(factor);
        let mut nodes = Vec::with_capacity(self.intervals() * factor + 1);
        nodes.push(T::zero());
        for m in 0..self.intervals() {
            let (a, b) = (self.nodes[m], self.nodes[m + 1]);
            for s in 1..factor {
                nodes.push(a + (b - a) * T::from_usize_lossy(s) / f);
            }
            nodes.push(b);
        }
        Self::new(nodes)
    }

    /// Index of the interval containing `t` (right-continuous; `T` maps to the last).
    pub fn interval_of(&self, t: T) -> usize {
        let m = self.nodes.partition_point(|&x| x <= t);
        m.saturating_sub(1).min(self.intervals() - 1)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| (*a - *b).abs() <= T::lit(1e-12) * (T::one() + a.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.4]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn refine_and_lookup() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let r = g.refine(3).unwrap();
        assert_eq!(r.intervals(), 12);
        assert_eq!(r.node(3), g.node(1));
        assert_eq!(r.horizon(), 1.0);
        assert_eq!(g.interval_of(0.0), 0);
        assert_eq!(g.interval_of(0.25), 1);
        assert_eq!(g.interval_of(1.0), 3);
    }
}
