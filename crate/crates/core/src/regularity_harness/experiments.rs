use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficient_model::{
    sample_path, CoefficientFamily, CoefficientPath, DriftChoice, Matrix, WeightKind,
};
use crate::error::{LabError, Result};
use crate::pde_solver::Forcing;
use crate::spde_solver::{solve_additive, solve_full, time_change_solve, SpdeData};
use crate::spectral_grid::{GridField, Spectrum};
use crate::stochastic_drivers::rng::{stream, LABEL_FAMILY};
use crate::stochastic_drivers::sample_wiener;

use super::config::ExperimentConfig;
use super::data::{build_data, FieldSpec, DEGENERACY_FLOOR};
use super::estimates::{
    estimate_a_from_terms, estimate_b_from_terms, run_paths, NormPair, RunPlan,
};
use super::norms::{Derivative, SpatialNorm};
use super::report::{EstimateReport, EstimateStatus};
use super::weighted::{path_weighted_integral, McValue};

/// Slope tolerance of the scaling fits.
pub const SLOPE_TOLERANCE: f64 = 0.05;
/// Fits whose RMS residual in `ln(norm)` exceeds this are inconclusive.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.05;

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum();
    (slope, icpt, (rss / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingTerm {
    pub term: String,
    pub p: f64,
    pub kappas: Vec<f64>,
    pub norms: Vec<f64>,
    pub stderr: Vec<f64>,
    pub paths: usize,
    pub slope: f64,
    pub expected: f64,
    pub residual: f64,
    pub status: FitStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaScalingReport {
    pub p: f64,
    pub seed: u64,
    pub terms: Vec<ScalingTerm>,
}

impl KappaScalingReport {
    pub fn passed(&self) -> bool {
        self.terms.iter().all(|t| t.status != FitStatus::Fail)
    }

    pub fn csv(&self, config_hash: &str) -> String {
        let mut out = String::from(
            "experiment_id,term,p,kappa,norm,norm_stderr,paths,fitted_slope,expected_slope,residual,status,seed,config_hash\n",
        );
        for t in &self.terms {
            for ((k, n), s) in t.kappas.iter().zip(&t.norms).zip(&t.stderr) {
                out.push_str(&format!(
                    "kappa_scaling,{},{},{},{:e},{:e},{},{},{},{:e},{:?},{},{}\n",
                    t.term,
                    t.p,
                    k,
                    n,
                    s,
                    t.paths,
                    t.slope,
                    t.expected,
                    t.residual,
                    t.status,
                    self.seed,
                    config_hash
                ));
            }
        }
        out
    }
}

fn g_components(
    cfg: &ExperimentConfig,
    grid: &crate::spectral_grid::Grid<f64>,
) -> Result<Option<Spectrum<f64>>> {
    if cfg.data.g.iter().all(FieldSpec::is_zero) {
        return Ok(None);
    }
    let parts = (0..cfg.coefficients.drivers)
        .map(|k| match cfg.data.g.get(k) {
            Some(s) => s.build(grid, Some(cfg), 2 + k as u64),
            None => Ok(GridField::zeros(grid.clone(), 1)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(GridField::stack(&parts)?.forward()))
}

/// `‖u_xx‖_{𝕃_p(T)}` for `a = (κ/2) I`, `σ = 0`, with each nonzero data term of
/// the config switched on alone; fits the slope of `ln norm` against `ln κ`.
pub fn kappa_scaling_experiment(cfg: &ExperimentConfig) -> Result<KappaScalingReport> {
    let grid = cfg.grid()?;
    let time = cfg.time_grid()?;
    let p = cfg.norms.p;
    let d = grid.dim();
    let k = cfg.coefficients.drivers;
    let zero = Spectrum::zeros(grid.clone(), 1);
    let mut cases: Vec<(&str, SpdeData<f64>, f64, usize)> = Vec::new();
    if !cfg.data.u0.is_zero() {
        cases.push((
            "u0",
            SpdeData::new(cfg.data.u0.build(&grid, Some(cfg), 0)?.forward()),
            -1.0 / p,
            1,
        ));
    }
    if !cfg.data.f.is_zero() {
        let f = Forcing::from_field(&cfg.data.f.build(&grid, Some(cfg), 1)?);
        cases.push(("f", SpdeData::new(zero.clone()).with_f(f), -1.0, 1));
    }
    if let Some(g) = g_components(cfg, &grid)? {
        cases.push((
            "g",
            SpdeData::new(zero.clone()).with_g(Forcing::constant(g)),
            -0.5,
            cfg.mc.paths,
        ));
    }
    if cases.is_empty() {
        return Err(LabError::InvalidParameter(
            "kappa scaling needs at least one nonzero data term".into(),
        ));
    }
    let hessian = SpatialNorm::new(&grid, Derivative::Hessian, 0.0, p)?;
    let kappas = &cfg.experiment.kappas;
    let mut terms = Vec::new();
    for (name, data, expected, paths) in cases {
        let jobs: Vec<(usize, usize)> = (0..kappas.len())
            .flat_map(|i| (0..paths).map(move |j| (i, j)))
            .collect();
        let values = jobs
            .par_iter()
            .map(|&(i, j)| {
                let a = Matrix::identity(d).scaled(kappas[i] / 2.0);
                let coeffs = CoefficientPath::constant(
                    time.clone(),
                    a,
                    Matrix::zeros(d, k),
                    "constant_elliptic",
                )?;
                let w = sample_wiener(k, &time, cfg.mc.seed, j as u64)?;
                let traj = solve_full(&data, &coeffs, &w)?;
                path_weighted_integral(&traj, &coeffs, &hessian, WeightKind::Unit)
            })
            .collect::<Result<Vec<f64>>>()?;
        let per_kappa: Vec<McValue> = values
            .chunks(paths)
            .map(|c| McValue::mean_of(c).root(p))
            .collect();
        let norms: Vec<f64> = per_kappa.iter().map(|v| v.value).collect();
        let lx: Vec<f64> = kappas.iter().map(|k| k.ln()).collect();
        let ly: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
        let (slope, _, residual) = fit_line(&lx, &ly);
        let status = if !(residual <= FIT_RESIDUAL_LIMIT) {
            FitStatus::Inconclusive
        } else if (slope - expected).abs() <= SLOPE_TOLERANCE {
            FitStatus::Pass
        } else {
            FitStatus::Fail
        };
        terms.push(ScalingTerm {
            term: name.into(),
            p,
            kappas: kappas.clone(),
            norms,
            stderr: per_kappa.iter().map(|v| v.stderr).collect(),
            paths,
            slope,
            expected,
            residual,
            status,
        });
    }
    Ok(KappaScalingReport {
        p,
        seed: cfg.mc.seed,
        terms,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessReport {
    pub paths: usize,
    /// `max_paths ‖u(T) - (u₀ + ∫f + Σ∫g dw)‖_{L_2}`.
    pub max_identity_error: f64,
    /// Largest relative gap between `‖u(T)‖_{H^{γ+1}_p}` and the same norm of
    /// the data combination.
    pub max_no_gain_gap: f64,
    /// Sup estimate with `u₀` alone.
    pub ratio_u0: EstimateReport,
    /// Sup estimate with the configured data.
    pub ratio_full: EstimateReport,
    pub passed: bool,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Fully degenerate coefficients: the solution is exactly the data
/// combination, so no smoothing can occur.
pub fn sharpness_experiment(cfg: &ExperimentConfig) -> Result<SharpnessReport> {
    let family = cfg.family()?;
    if family != CoefficientFamily::FullyDegenerate {
        return Err(LabError::InvalidParameter(format!(
            "sharpness needs the fully_degenerate family, got {}",
            family.tag()
        )));
    }
    let grid = cfg.grid()?;
    let time = cfg.time_grid()?;
    let k = cfg.coefficients.drivers;
    let l2 = SpatialNorm::new(&grid, Derivative::Value, 0.0, 2.0)?;
    let lifted = SpatialNorm::new(&grid, Derivative::Value, cfg.norms.gamma + 1.0, cfg.norms.p)?;
    let per_path = (0..cfg.mc.paths)
        .into_par_iter()
        .map(|i| {
            let coeffs = sample_path(&family, grid.dim(), k, &time, cfg.mc.seed, i as u64)?;
            let w = sample_wiener(k, &time, cfg.mc.seed, i as u64)?;
            let data = build_data(cfg, &grid, &coeffs)?;
            let u = solve_full(&data, &coeffs, &w)?;
            let mut direct = data.u0.clone();
            for m in 0..time.intervals() {
                if let Some(mut f) = data.f.spectrum_at(m) {
                    f.scale(time.dt(m));
                    direct.add_assign(&f);
                }
                if let Some(g) = data.g.spectrum_at(m) {
                    let mut acc = Spectrum::zeros(grid.clone(), 1);
                    for kk in 0..k {
                        let mut c = g.component_spectrum(kk);
                        c.scale(w.increment(m, kk));
                        acc.add_assign(&c);
                    }
                    direct.add_assign(&acc);
                }
            }
            let mut diff = u.terminal().clone();
            let mut neg = direct.clone();
            neg.scale(-1.0);
            diff.add_assign(&neg);
            let err = l2.eval(&diff)?;
            let (a, b) = (lifted.eval(u.terminal())?, lifted.eval(&direct)?);
            let gap = if b == 0.0 { a } else { (a - b).abs() / b };
            Ok((err, gap))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let max_identity_error = per_path.iter().map(|x| x.0).fold(0.0, f64::max);
    let max_no_gain_gap = per_path.iter().map(|x| x.1).fold(0.0, f64::max);

    let pair = NormPair {
        gamma: cfg.norms.gamma,
        p: cfg.norms.p,
    };
    let mut u0_only = cfg.clone();
    u0_only.data.f = FieldSpec::Zero;
    u0_only.data.g = Vec::new();
    let estimate = |c: &ExperimentConfig, id: &str| -> Result<EstimateReport> {
        let plan = RunPlan {
            cfg: c,
            family: family.clone(),
            paths: c.mc.paths,
            refine: 1,
            pairs: vec![pair],
        };
        let mut r = estimate_a_from_terms(c, &run_paths(&plan)?, 0, pair, 1)?;
        r.experiment_id = id.into();
        Ok(r)
    };
    let ratio_u0 = estimate(&u0_only, "sharpness_u0")?;
    let ratio_full = estimate(cfg, "sharpness_full")?;
    let ratio_ok = match ratio_u0.status {
        EstimateStatus::Finite => {
            (ratio_u0.ratio - 1.0).abs() <= 3.0 * ratio_u0.lhs_stderr / ratio_u0.rhs_total + 1e-12
        }
        EstimateStatus::Trivial => true,
        _ => false,
    };
    let passed = max_identity_error < IDENTITY_TOLERANCE && max_no_gain_gap < 1e-10 && ratio_ok;
    Ok(SharpnessReport {
        paths: cfg.mc.paths,
        max_identity_error,
        max_no_gain_gap,
        ratio_u0,
        ratio_full,
        passed,
    })
}

/// Random `random_psd` parameters for family `index`.
pub fn random_family(seed: u64, index: usize, degenerate_prob: Option<f64>) -> CoefficientFamily {
    let mut rng = stream(seed, index as u64, LABEL_FAMILY);
    let scale = rng.random_range(0.5..2.0);
    let sigma_scale = rng.random_range(0.0..1.0);
    let degenerate_prob = degenerate_prob.unwrap_or_else(|| rng.random_range(0.2..0.8));
    CoefficientFamily::RandomPsd {
        scale,
        sigma_scale,
        degenerate_prob,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeChangeReport {
    pub families: usize,
    /// Families skipped because some interval had `δ = 0`.
    pub skipped: usize,
    /// Relative sup-difference between the two routes, per family.
    pub differences: Vec<f64>,
    pub max_difference: f64,
    pub passed: bool,
}

pub const TIME_CHANGE_TOLERANCE: f64 = 1e-12;

/// Direct solve with drift `α` against the solve in the clock `β(t) = ∫δ`,
/// over random families with `δ > 0`.
pub fn timechange_check(cfg: &ExperimentConfig) -> Result<TimeChangeReport> {
    let grid = cfg.grid()?;
    let time = cfg.time_grid()?;
    let k = cfg.coefficients.drivers;
    let results = (0..cfg.experiment.families)
        .into_par_iter()
        .map(|j| {
            let family = random_family(cfg.mc.seed, j, Some(0.0));
            let coeffs = sample_path(&family, grid.dim(), k, &time, cfg.mc.seed, j as u64)?;
            if coeffs.deltas().iter().any(|&d| d <= DEGENERACY_FLOOR) {
                return Ok(None);
            }
            let w = sample_wiener(k, &time, cfg.mc.seed, j as u64)?;
            let data = build_data(cfg, &grid, &coeffs)?;
            let direct = solve_additive(&data, &coeffs, DriftChoice::Alpha, &w)?;
            let changed = time_change_solve(&data, &coeffs, DriftChoice::Alpha, &w)?;
            let scale = direct
                .states()
                .iter()
                .flat_map(|s| s.coeffs().iter())
                .fold(1.0f64, |a, c| a.max(c.norm()));
            Ok(Some(direct.max_abs_diff(&changed) / scale))
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    let differences: Vec<f64> = results.iter().flatten().copied().collect();
    let max_difference = differences.iter().copied().fold(0.0, f64::max);
    Ok(TimeChangeReport {
        families: differences.len(),
        skipped: results.len() - differences.len(),
        passed: !differences.is_empty() && max_difference < TIME_CHANGE_TOLERANCE,
        differences,
        max_difference,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeLine {
    pub p: f64,
    pub gamma: f64,
    pub max_ratio: f64,
    pub max_ratio_refined: f64,
    pub relative_change: f64,
    /// Families with a finite right-hand side but non-finite ratio.
    pub nonfinite: usize,
    pub vacuous: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeReport {
    pub families: usize,
    pub lines: Vec<EnvelopeLine>,
    pub rows: Vec<EstimateReport>,
    pub passed: bool,
}

pub const ENVELOPE_STABILITY: f64 = 0.2;

/// Weighted Hessian estimate over random degenerate families, at the
/// configured sizes and again with paths and time steps doubled.
pub fn estimate_b_envelope(cfg: &ExperimentConfig) -> Result<EnvelopeReport> {
    let pairs: Vec<NormPair> = cfg
        .experiment
        .p_values
        .iter()
        .flat_map(|&p| {
            cfg.experiment
                .gammas
                .iter()
                .map(move |&gamma| NormPair { gamma, p })
        })
        .collect();
    let mut rows = Vec::new();
    let mut ratios = vec![[Vec::new(), Vec::new()]; pairs.len()];
    for j in 0..cfg.experiment.families {
        let family = random_family(cfg.mc.seed, j, None);
        let mut fam_cfg = cfg.clone();
        fam_cfg.coefficients.family = family.tag().into();
        let value = serde_json::to_value(&family)?;
        fam_cfg.coefficients.params = value["params"].as_object().cloned().unwrap_or_default();
        fam_cfg.mc.seed = cfg.mc.seed.wrapping_add(j as u64);
        for (level, (paths, refine)) in [(cfg.mc.paths, 1), (2 * cfg.mc.paths, 2)]
            .into_iter()
            .enumerate()
        {
            let plan = RunPlan {
                cfg: &fam_cfg,
                family: family.clone(),
                paths,
                refine,
                pairs: pairs.clone(),
            };
            let terms = run_paths(&plan)?;
            for (i, &pair) in pairs.iter().enumerate() {
                let mut r = estimate_b_from_terms(&fam_cfg, &terms, i, pair, refine)?;
                r.experiment_id = format!(
                    "envelope_{j}_{}",
                    if level == 0 { "base" } else { "refined" }
                );
                ratios[i][level].push((r.status, r.ratio));
                rows.push(r);
            }
        }
    }
    let lines: Vec<EnvelopeLine> = pairs
        .iter()
        .zip(&ratios)
        .map(|(pair, [base, fine])| {
            let max_of = |v: &Vec<(EstimateStatus, f64)>| {
                v.iter()
                    .filter(|(s, _)| *s == EstimateStatus::Finite)
                    .map(|x| x.1)
                    .fold(0.0, f64::max)
            };
            let (a, b) = (max_of(base), max_of(fine));
            EnvelopeLine {
                p: pair.p,
                gamma: pair.gamma,
                max_ratio: a,
                max_ratio_refined: b,
                relative_change: if a > 0.0 { (b - a).abs() / a } else { 0.0 },
                nonfinite: base
                    .iter()
                    .chain(fine)
                    .filter(|(s, r)| {
                        matches!(s, EstimateStatus::Finite | EstimateStatus::Violation)
                            && !r.is_finite()
                    })
                    .count(),
                vacuous: base
                    .iter()
                    .chain(fine)
                    .filter(|(s, _)| *s == EstimateStatus::Vacuous)
                    .count(),
            }
        })
        .collect();
    let passed = lines
        .iter()
        .all(|l| l.nonfinite == 0 && l.relative_change < ENVELOPE_STABILITY);
    Ok(EnvelopeReport {
        families: cfg.experiment.families,
        lines,
        rows,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_slope() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 0.75 * v).collect();
        let (s, c, r) = fit_line(&x, &y);
        assert!((s + 0.75).abs() < 1e-14 && (c - 1.0).abs() < 1e-14 && r < 1e-14);
    }

    fn small_degenerate() -> ExperimentConfig {
        let mut c = ExperimentConfig::with_family(&CoefficientFamily::FullyDegenerate, 2);
        c.grid.n = 16;
        c.time.steps = 8;
        c.mc.paths = 12;
        c.data.u0 = FieldSpec::RandomBand {
            kmax: 3,
            amplitude: 1.0,
            seed: 3,
        };
        c.data.f = FieldSpec::RandomBand {
            kmax: 2,
            amplitude: 0.5,
            seed: 4,
        };
        c.data.g = vec![
            FieldSpec::RandomBand {
                kmax: 2,
                amplitude: 0.5,
                seed: 5,
            },
            FieldSpec::Mode {
                wavenumber: vec![3],
                amplitude: 0.2,
                phase: 0.0,
            },
        ];
        c
    }

    #[test]
    fn sharpness_identity_holds() {
        let r = sharpness_experiment(&small_degenerate()).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.ratio_u0.ratio - 1.0).abs() < 1e-12);
        assert!(r.max_identity_error < 1e-13);
    }

    #[test]
    fn sharpness_rejects_other_families() {
        let mut c = small_degenerate();
        c.coefficients.family = "constant_elliptic".into();
        c.coefficients.params.insert("kappa".into(), 1.0.into());
        assert!(sharpness_experiment(&c).is_err());
    }

    #[test]
    fn time_change_routes_agree() {
        let mut c = small_degenerate();
        c.grid.d = 2;
        c.data.u0 = FieldSpec::RandomBand {
            kmax: 2,
            amplitude: 1.0,
            seed: 3,
        };
        c.data.f = FieldSpec::Zero;
        c.data.g = vec![FieldSpec::RandomBand {
            kmax: 2,
            amplitude: 0.5,
            seed: 5,
        }];
        c.experiment.families = 4;
        let r = timechange_check(&c).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.families + r.skipped, 4);
    }

    #[test]
    fn scaling_of_heat_flow_initial_term() {
        let mut c = ExperimentConfig::with_family(
            &CoefficientFamily::ConstantElliptic {
                kappa: 1.0,
                sigma: 0.0,
            },
            1,
        );
        c.grid.n = 16;
        c.time.horizon = 40.0;
        c.time.steps = 4000;
        let r = kappa_scaling_experiment(&c).unwrap();
        assert_eq!(r.terms.len(), 1);
        assert_eq!(r.terms[0].status, FitStatus::Pass, "{r:?}");
        assert!(r.csv("h").lines().count() == 6);
    }
}
