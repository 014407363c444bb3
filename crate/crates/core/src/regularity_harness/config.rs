use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::coefficient_model::{CoefficientFamily, TimeGrid};
use crate::error::{LabError, Result};
use crate::spectral_grid::Grid;

use super::data::FieldSpec;

fn default_d() -> usize {
    1
}
fn default_n() -> usize {
    64
}
fn default_length() -> f64 {
    std::f64::consts::TAU
}
fn default_horizon() -> f64 {
    1.0
}
fn default_steps() -> usize {
    64
}
fn default_drivers() -> usize {
    8
}
fn default_p() -> f64 {
    2.0
}
fn default_paths() -> usize {
    100
}
fn default_u0() -> FieldSpec {
    FieldSpec::Mode {
        wavenumber: vec![1],
        amplitude: 1.0,
        phase: 0.0,
    }
}
fn default_families() -> usize {
    50
}
fn default_kappas() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0]
}
fn default_eps() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}
fn default_substeps() -> Vec<usize> {
    vec![4, 16, 64]
}
fn default_p_values() -> Vec<f64> {
    vec![2.0, 4.0]
}
fn default_gammas() -> Vec<f64> {
    vec![0.0, 1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(rename = "L", default = "default_length")]
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            d: default_d(),
            n: default_n(),
            length: default_length(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    #[serde(rename = "M", default = "default_steps")]
    pub steps: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            steps: default_steps(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    pub family: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(rename = "K", default = "default_drivers")]
    pub drivers: usize,
}

/// Initial data and free terms. `g` lists the first components of the
/// `K`-vector; missing components are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default = "default_u0")]
    pub u0: FieldSpec,
    #[serde(default)]
    pub f: FieldSpec,
    #[serde(default)]
    pub g: Vec<FieldSpec>,
    /// `f` is switched on for intervals whose midpoint lies in `[a, b)`.
    #[serde(default)]
    pub f_window: Option<[f64; 2]>,
    #[serde(default)]
    pub g_window: Option<[f64; 2]>,
    /// Switch `f` and `g` off on intervals where `δ` does not exceed this level.
    #[serde(default)]
    pub mask_delta_below: Option<f64>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            u0: default_u0(),
            f: FieldSpec::Zero,
            g: Vec::new(),
            f_window: None,
            g_window: None,
            mask_delta_below: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_p")]
    pub p: f64,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            p: default_p(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: default_paths(),
            seed: 0,
        }
    }
}

/// Knobs of the multi-run experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    /// Number of random families in envelope runs.
    #[serde(default = "default_families")]
    pub families: usize,
    #[serde(default = "default_kappas")]
    pub kappas: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_substeps")]
    pub substeps: Vec<usize>,
    /// Exponents and orders swept by envelope runs.
    #[serde(default = "default_p_values")]
    pub p_values: Vec<f64>,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            families: default_families(),
            kappas: default_kappas(),
            eps: default_eps(),
            substeps: default_substeps(),
            p_values: default_p_values(),
            gammas: default_gammas(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    pub coefficients: CoefficientsConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub experiment: ExperimentParams,
    /// Directory that relative field-file paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn invalid(msg: String) -> LabError {
    LabError::InvalidParameter(msg)
}

impl ExperimentConfig {
    /// Defaults everywhere except the coefficient family.
    pub fn with_family(family: &CoefficientFamily, drivers: usize) -> Self {
        let value = serde_json::to_value(family).expect("family serializes");
        let params = value
            .get("params")
            .and_then(Value::as_object)
            .cloned()
            .unwrap_or_default();
        Self {
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            coefficients: CoefficientsConfig {
                family: family.tag().into(),
                params,
                drivers,
            },
            data: DataConfig::default(),
            norms: NormsConfig::default(),
            mc: McConfig::default(),
            experiment: ExperimentParams::default(),
            base_dir: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let at = e.path().to_string();
            let inner = e.into_inner();
            if at == "." {
                LabError::Format(format!("config: {inner}"))
            } else {
                LabError::Format(format!("config: {at}: {inner}"))
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn family(&self) -> Result<CoefficientFamily> {
        let c = &self.coefficients;
        if let Some(names) = CoefficientFamily::param_names(&c.family) {
            if let Some(key) = c.params.keys().find(|k| !names.contains(&k.as_str())) {
                return Err(invalid(format!(
                    "unknown key coefficients.params.{key} for family '{}' (expected one of: {})",
                    c.family,
                    names.join(", ")
                )));
            }
        }
        let mut obj = Map::new();
        obj.insert("family".into(), Value::String(c.family.clone()));
        // Families whose parameters all have defaults still need a params object.
        obj.insert("params".into(), Value::Object(c.params.clone()));
        let family: CoefficientFamily = serde_json::from_value(Value::Object(obj.clone()))
            .or_else(|e| {
                obj.remove("params");
                serde_json::from_value(Value::Object(obj)).map_err(|_| e)
            })
            .map_err(|e| invalid(format!("coefficients.family '{}': {e}", c.family)))?;
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.norms.p >= 2.0) || !self.norms.p.is_finite() {
            return Err(invalid(format!(
                "norms.p: p must be ≥ 2, got {}",
                self.norms.p
            )));
        }
        if !self.norms.gamma.is_finite() {
            return Err(invalid(format!(
                "norms.gamma must be finite, got {}",
                self.norms.gamma
            )));
        }
        self.grid()?;
        self.time_grid()?;
        if self.coefficients.drivers == 0 {
            return Err(invalid("coefficients.K must be ≥ 1".into()));
        }
        if self.data.g.len() > self.coefficients.drivers {
            return Err(invalid(format!(
                "data.g has {} components but coefficients.K = {}",
                self.data.g.len(),
                self.coefficients.drivers
            )));
        }
        for (name, w) in [
            ("data.f_window", self.data.f_window),
            ("data.g_window", self.data.g_window),
        ] {
            if let Some([a, b]) = w {
                if !(a < b) {
                    return Err(invalid(format!("{name}: need a < b, got [{a}, {b}]")));
                }
            }
        }
        if let Some(level) = self.data.mask_delta_below {
            if !(level >= 0.0) || !level.is_finite() {
                return Err(invalid(format!(
                    "data.mask_delta_below must be a finite level ≥ 0, got {level}"
                )));
            }
        }
        if self.mc.paths == 0 {
            return Err(invalid("mc.paths must be ≥ 1".into()));
        }
        let e = &self.experiment;
        if e.kappas.iter().any(|&k| !(k > 0.0) || !k.is_finite()) || e.kappas.len() < 2 {
            return Err(invalid(
                "experiment.kappas: need at least two positive values".into(),
            ));
        }
        if e.eps.windows(2).any(|w| !(w[0] > w[1])) || e.eps.iter().any(|&x| !(x > 0.0)) {
            return Err(invalid(
                "experiment.eps must be positive and strictly decreasing".into(),
            ));
        }
        if e.p_values.is_empty() || e.p_values.iter().any(|&p| !(p >= 2.0) || !p.is_finite()) {
            return Err(invalid("experiment.p_values: p must be ≥ 2".into()));
        }
        if e.gammas.is_empty() || e.gammas.iter().any(|g| !g.is_finite()) {
            return Err(invalid(
                "experiment.gammas must be finite and non-empty".into(),
            ));
        }
        if e.substeps.len() < 2 || e.substeps.contains(&0) {
            return Err(invalid(
                "experiment.substeps: need at least two positive values".into(),
            ));
        }
        self.family()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        Grid::new(self.grid.d, self.grid.n, self.grid.length)
            .map_err(|e| invalid(format!("grid: {e}")))
    }

    pub fn time_grid(&self) -> Result<TimeGrid<f64>> {
        TimeGrid::uniform(self.time.horizon, self.time.steps)
            .map_err(|e| invalid(format!("time: {e}")))
    }

    /// Canonical JSON text (defaults filled in).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// FNV-1a of the canonical JSON, as 16 hex digits.
    pub fn hash(&self) -> String {
        let h = self
            .canonical_json()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
            });
        format!("{h:016x}")
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        match &self.base_dir {
            Some(dir) if Path::new(path).is_relative() => dir.join(path),
            _ => PathBuf::from(path),
        }
    }
}

/// Reads and validates a JSON config; relative field files resolve against
/// the config's directory.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut cfg = ExperimentConfig::from_json_str(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}
