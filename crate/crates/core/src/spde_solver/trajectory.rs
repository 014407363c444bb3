use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficient_model::{CoefficientPath, TimeGrid};
use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::spectral_grid::{io, GridField, Spectrum};

/// Seeds identifying one realization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationIds {
    pub coefficient_seed: u64,
    pub wiener_seed: u64,
    pub path_index: u64,
}

/// Spectra of the solution at every node of a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    time: TimeGrid<T>,
    states: Vec<Spectrum<T>>,
    ids: RealizationIds,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    time: Vec<f64>,
    ids: RealizationIds,
    files: Vec<String>,
    coefficients: Option<String>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(time: TimeGrid<T>, states: Vec<Spectrum<T>>, ids: RealizationIds) -> Result<Self> {
        if states.len() != time.intervals() + 1 {
            return Err(LabError::Shape(format!(
                "{} states for {} time nodes",
                states.len(),
                time.intervals() + 1
            )));
        }
        if let Some(index) = states.iter().position(|s| !s.is_finite()) {
            return Err(LabError::NonFinite {
                what: "solution",
                index,
            });
        }
        if states.iter().any(|s| s.grid() != states[0].grid()) {
            return Err(LabError::Shape(
                "trajectory states on different grids".into(),
            ));
        }
        Ok(Self { time, states, ids })
    }

    pub fn time(&self) -> &TimeGrid<T> {
        &self.time
    }

    pub fn ids(&self) -> RealizationIds {
        self.ids
    }

    pub fn states(&self) -> &[Spectrum<T>] {
        &self.states
    }

    pub fn state(&self, m: usize) -> &Spectrum<T> {
        &self.states[m]
    }

    pub fn terminal(&self) -> &Spectrum<T> {
        &self.states[self.states.len() - 1]
    }

    pub fn field(&self, m: usize) -> GridField<T> {
        self.states[m].inverse()
    }

    /// Largest coefficient-wise difference over all nodes.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.states
            .iter()
            .zip(&other.states)
            .fold(T::zero(), |acc, (a, b)| acc.max(a.max_abs_diff(b)))
    }

    /// Writes `u_0000.field, …` and `manifest.json` into `dir`; the
    /// coefficients, when given, go to `coefficients.json`.
    pub fn dump(&self, dir: impl AsRef<Path>, coeffs: Option<&CoefficientPath<T>>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.states.len());
        for (m, s) in self.states.iter().enumerate() {
            let name = format!("u_{m:04}.field");
            io::save_field(&s.inverse(), dir.join(&name))?;
            files.push(name);
        }
        let coefficients = match coeffs {
            Some(c) => {
                c.save_json(dir.join("coefficients.json"))?;
                Some("coefficients.json".to_string())
            }
            None => None,
        };
        let manifest = Manifest {
            time: self.time.nodes().iter().map(|t| t.as_f64()).collect(),
            ids: self.ids,
            files,
            coefficients,
        };
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let time = TimeGrid::new(manifest.time.iter().map(|&t| T::lit(t)).collect())?;
        let states = manifest
            .files
            .iter()
            .map(|f| io::load_field::<T>(dir.join(f)).map(|u| u.forward()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(time, states, manifest.ids)
    }
}
