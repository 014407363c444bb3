use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

use super::config::ExperimentConfig;

/// Outcome class of one estimate evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateStatus {
    /// Finite right-hand side; the ratio is an empirical constant.
    Finite,
    /// Both sides vanish.
    Trivial,
    /// Some right-hand term is infinite: the estimate says nothing.
    Vacuous,
    /// Right-hand side zero but left-hand side not.
    Violation,
}

impl EstimateStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Finite => "finite",
            Self::Trivial => "trivial",
            Self::Vacuous => "vacuous",
            Self::Violation => "violation",
        }
    }
}

/// One evaluation of an a-priori estimate. For the sup estimate every entry
/// is a `p`-th power; for the weighted Hessian estimate every entry is a norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub experiment_id: String,
    pub family: String,
    pub d: usize,
    pub p: f64,
    pub gamma: f64,
    #[serde(rename = "K")]
    pub drivers: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_grid: usize,
    pub n_time: usize,
    pub n_paths: usize,
    pub lhs: f64,
    pub rhs_u0: f64,
    pub rhs_f: f64,
    pub rhs_gx_sigma: f64,
    pub rhs_gx_delta: f64,
    pub rhs_total: f64,
    pub ratio: f64,
    pub lhs_stderr: f64,
    pub seed: u64,
    /// Unweighted `g` term (sup estimate only).
    pub rhs_g: f64,
    pub status: EstimateStatus,
}

const LHS_ZERO: f64 = 1e-12;

impl EstimateReport {
    /// Fills `rhs_total`, `ratio` and `status` from the stored components.
    pub fn finish(mut self) -> Self {
        self.rhs_total =
            self.rhs_u0 + self.rhs_f + self.rhs_g + self.rhs_gx_sigma + self.rhs_gx_delta;
        let (ratio, status) = if self.rhs_total.is_infinite() {
            (0.0, EstimateStatus::Vacuous)
        } else if self.rhs_total == 0.0 {
            if self.lhs.abs() <= LHS_ZERO {
                (0.0, EstimateStatus::Trivial)
            } else {
                (f64::INFINITY, EstimateStatus::Violation)
            }
        } else {
            (self.lhs / self.rhs_total, EstimateStatus::Finite)
        };
        self.ratio = ratio;
        self.status = status;
        self
    }

    pub const CSV_HEADER: &'static str =
        "experiment_id,family,d,p,gamma,K,T,n_grid,n_time,n_paths,lhs,rhs_u0,rhs_f,\
rhs_gx_sigma,rhs_gx_delta,rhs_total,ratio,lhs_stderr,seed,rhs_g,status,config_hash";

    pub fn csv_row(&self, config_hash: &str) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{},{}",
            self.experiment_id,
            self.family,
            self.d,
            self.p,
            self.gamma,
            self.drivers,
            self.horizon,
            self.n_grid,
            self.n_time,
            self.n_paths,
            self.lhs,
            self.rhs_u0,
            self.rhs_f,
            self.rhs_gx_sigma,
            self.rhs_gx_delta,
            self.rhs_total,
            self.ratio,
            self.lhs_stderr,
            self.seed,
            self.rhs_g,
            self.status.as_str(),
            config_hash
        )
    }
}

/// CSV text with a header line.
pub fn estimates_csv(rows: &[EstimateReport], config_hash: &str) -> String {
    let mut out = String::from(EstimateReport::CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row(config_hash));
    }
    out
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    config_hash: String,
    seed: u64,
    config: &'a ExperimentConfig,
    report: &'a R,
}

/// JSON document holding a report together with the full config and its hash.
pub fn report_json<R: Serialize>(config: &ExperimentConfig, report: &R) -> Result<String> {
    let env = Envelope {
        config_hash: config.hash(),
        seed: config.mc.seed,
        config,
        report,
    };
    Ok(serde_json::to_string_pretty(&env)?)
}

/// Writes `<stem>.csv` and `<stem>.json` for a set of estimate rows.
pub fn write_estimates(
    dir: impl AsRef<Path>,
    stem: &str,
    config: &ExperimentConfig,
    rows: &[EstimateReport],
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join(format!("{stem}.csv")),
        estimates_csv(rows, &config.hash()),
    )?;
    std::fs::write(
        dir.join(format!("{stem}.json")),
        report_json(config, &rows)?,
    )?;
    Ok(())
}
