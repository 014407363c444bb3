//! The eleven acceptance checks, each reduced to a pass/fail outcome with the
//! measured numbers attached.

use std::f64::consts::TAU;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::coefficient_model::{
    sample_path, CoefficientFamily, CoefficientPath, DriftChoice, Matrix, TimeGrid,
};
use crate::error::Result;
use crate::littlewood_paley::build_partition;
use crate::pde_solver::{feynman_kac_oracle, solve_deterministic, Forcing};
use crate::spde_solver::{
    euler_maruyama_oracle, regularization_sweep, solve_additive, solve_full, SpdeData,
};
use crate::spectral_grid::{Grid, GridField};
use crate::stochastic_drivers::{sample_wiener, sample_wiener_refined};

use super::config::ExperimentConfig;
use super::data::{build_data, FieldSpec};
use super::experiments::{
    estimate_b_envelope, fit_line, kappa_scaling_experiment, sharpness_experiment,
    timechange_check, FitStatus,
};
use super::norms::{Derivative, SpatialNorm};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed(
    id: u32,
    name: &'static str,
    run: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn sine(grid: &Grid<f64>) -> Result<GridField<f64>> {
    GridField::from_fn(grid.clone(), |x| x[0].sin())
}

fn heat(time: TimeGrid<f64>, d: usize, drivers: usize) -> Result<CoefficientPath<f64>> {
    CoefficientPath::constant(
        time,
        Matrix::identity(d).scaled(0.5),
        Matrix::zeros(d, drivers),
        "heat",
    )
}

/// `a = ½`, `u₀ = sin`: `u(1) = e^{-1/2} sin` to 1e-12 in under a second.
pub fn heat_exactness() -> CriterionOutcome {
    let start = Instant::now();
    let mut out = timed(1, "heat-flow exactness", || {
        let grid = Grid::new(1, 256, TAU)?;
        let c = heat(TimeGrid::uniform(1.0, 1)?, 1, 1)?;
        let u = solve_deterministic(&sine(&grid)?.forward(), &Forcing::zero(), &c)?;
        let want = GridField::from_fn(grid, |x| (-0.5f64).exp() * x[0].sin())?;
        let err = u.field(1).max_abs_diff(&want);
        Ok((err < 1e-12, format!("max error {err:.2e} (limit 1e-12)")))
    });
    let secs = start.elapsed().as_secs_f64();
    out.passed &= secs < 1.0;
    out.detail.push_str(", runtime limit 1 s");
    out
}

/// `|Σ_j Ψ̂(2^{-j}ξ) - 1| < 1e-12` on every covered mode for `n = 256`, `d = 1, 2`.
pub fn partition_of_unity() -> CriterionOutcome {
    timed(2, "Littlewood-Paley partition", || {
        let mut worst = 0.0f64;
        let mut covered = 0;
        for d in [1, 2] {
            let grid = Grid::new(d, 256, TAU)?;
            let part = build_partition(&grid)?;
            for m in 0..grid.len() {
                if part.covers(m) {
                    covered += 1;
                    worst = worst.max((part.partition_sum(m) - 1.0).abs());
                }
            }
        }
        Ok((
            worst < 1e-12 && covered > 0,
            format!("max |sum - 1| = {worst:.2e} over {covered} modes (limit 1e-12)"),
        ))
    })
}

/// Dilation by 2 multiplies the homogeneous Besov norm by `2^{γ-d/p}`.
pub fn besov_scaling() -> CriterionOutcome {
    timed(3, "homogeneous Besov scaling", || {
        let grid = Grid::new(1, 256, TAU)?;
        let u = GridField::from_fn(grid.clone(), |x| {
            (3.0 * x[0]).sin() + 0.5 * (7.0 * x[0] + 0.4).cos() - 0.25 * (19.0 * x[0]).sin()
        })?;
        let v = u.dilate(1)?;
        let (pu, pv) = (build_partition(&grid)?, build_partition(v.grid())?);
        let mut worst = 0.0f64;
        for (gamma, p) in [(1.0, 2.0), (1.5, 4.0)] {
            let ratio = pv.homogeneous_besov_norm(&v, gamma, p)?
                / pu.homogeneous_besov_norm(&u, gamma, p)?;
            let want = 2f64.powf(gamma - 1.0 / p);
            worst = worst.max((ratio / want - 1.0).abs());
        }
        Ok((
            worst < 1e-10,
            format!("max relative deviation {worst:.2e} (limit 1e-10)"),
        ))
    })
}

/// Auxiliary-path average against the spectral solution of the heat equation.
pub fn feynman_kac_agreement(seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let mut out = timed(4, "Feynman-Kac agreement", || {
        let grid = Grid::new(1, 32, TAU)?;
        let c = heat(TimeGrid::uniform(1.0, 4)?, 1, 1)?;
        let u0 = sine(&grid)?.forward();
        let exact = solve_deterministic(&u0, &Forcing::zero(), &c)?.field(4);
        let est = feynman_kac_oracle(&u0, &Forcing::zero(), &c, 20_000, seed)?;
        let z = est.max_z_score(&exact);
        Ok((
            z < 3.0,
            format!("max z-score {z:.2} over 32 points, 20000 paths (limit 3)"),
        ))
    });
    out.passed &= start.elapsed().as_secs_f64() < 30.0;
    out.detail.push_str(", runtime limit 30 s");
    out
}

/// Fully degenerate sharpness config used by the suite.
pub fn sharpness_config(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::with_family(&CoefficientFamily::FullyDegenerate, 2);
    c.grid.n = 32;
    c.time.steps = 32;
    c.mc = super::config::McConfig { paths: 100, seed };
    c.data.u0 = FieldSpec::RandomBand {
        kmax: 4,
        amplitude: 1.0,
        seed,
    };
    c.data.f = FieldSpec::RandomBand {
        kmax: 3,
        amplitude: 0.5,
        seed: seed + 1,
    };
    c.data.g = vec![
        FieldSpec::RandomBand {
            kmax: 3,
            amplitude: 0.5,
            seed: seed + 2,
        },
        FieldSpec::Mode {
            wavenumber: vec![2],
            amplitude: 0.3,
            phase: 0.1,
        },
    ];
    c
}

pub fn sharpness(seed: u64) -> CriterionOutcome {
    timed(5, "sharpness (fully degenerate)", || {
        let r = sharpness_experiment(&sharpness_config(seed))?;
        Ok((
            r.passed,
            format!(
                "max identity error {:.2e} over {} paths (limit 1e-12), estimate-A ratio {:.6} ± {:.1e}",
                r.max_identity_error, r.paths, r.ratio_u0.ratio, r.ratio_u0.lhs_stderr
            ),
        ))
    })
}

/// `Var û(T, ξ)` for `du = ½ u_xx dt + sin x dw` against `(1 - e^{-T}) |ĝ(ξ)|²`.
pub fn ito_isometry(seed: u64) -> CriterionOutcome {
    timed(6, "Ito isometry", || {
        let grid = Grid::new(1, 16, TAU)?;
        let time = TimeGrid::uniform(1.0, 64)?;
        let c = heat(time.clone(), 1, 1)?;
        let g = sine(&grid)?.forward();
        let mode = grid.mode_index(&[1]);
        let g_hat = g.coeffs()[mode];
        let data = SpdeData::new(crate::spectral_grid::Spectrum::zeros(grid.clone(), 1))
            .with_g(Forcing::constant(g));
        let paths = 100_000usize;
        let samples = (0..paths)
            .into_par_iter()
            .map(|i| {
                let w = sample_wiener(1, &time, seed, i as u64)?;
                Ok(solve_additive(&data, &c, DriftChoice::A, &w)?
                    .terminal()
                    .coeffs()[mode]
                    .norm_sqr())
            })
            .collect::<Result<Vec<f64>>>()?;
        let var = samples.iter().sum::<f64>() / paths as f64;
        let want = (1.0 - (-1.0f64).exp()) * g_hat.norm_sqr();
        let rel = (var / want - 1.0).abs();
        Ok((
            rel < 0.05,
            format!("relative variance error {rel:.4} over {paths} paths (limit 0.05)"),
        ))
    })
}

/// Config for the time-change comparison.
pub fn timechange_config(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::with_family(
        &CoefficientFamily::RandomPsd {
            scale: 1.0,
            sigma_scale: 0.5,
            degenerate_prob: 0.0,
        },
        2,
    );
    c.grid = super::config::GridConfig {
        d: 2,
        n: 16,
        length: TAU,
    };
    c.time.steps = 32;
    c.mc.seed = seed;
    c.experiment.families = 20;
    c.data.u0 = FieldSpec::RandomBand {
        kmax: 3,
        amplitude: 1.0,
        seed,
    };
    c.data.f = FieldSpec::RandomBand {
        kmax: 2,
        amplitude: 0.5,
        seed: seed + 1,
    };
    c.data.g = vec![FieldSpec::RandomBand {
        kmax: 2,
        amplitude: 0.5,
        seed: seed + 2,
    }];
    c
}

pub fn time_change(seed: u64) -> CriterionOutcome {
    timed(7, "time-change route equivalence", || {
        let r = timechange_check(&timechange_config(seed))?;
        Ok((
            r.passed && r.families == 20,
            format!(
                "max relative difference {:.2e} over {} families (limit 1e-12)",
                r.max_difference, r.families
            ),
        ))
    })
}

/// Strong error of Euler–Maruyama against the shifted exact solver on a
/// 1024-fold refinement; slope of `ln error` against `ln Δt`.
pub fn shift_convergence(seed: u64) -> CriterionOutcome {
    timed(8, "shift-reduction convergence", || {
        const REFERENCE: usize = 1024;
        let substeps = [4usize, 16, 64];
        let grid = Grid::new(2, 8, TAU)?;
        let time = TimeGrid::uniform(1.0, 4)?;
        let family = CoefficientFamily::VanishingEigenvalue {
            kappa: 0.5,
            period: 2,
            sigma: 0.6,
        };
        let mut cfg = ExperimentConfig::with_family(&family, 2);
        cfg.grid = super::config::GridConfig {
            d: 2,
            n: 8,
            length: TAU,
        };
        cfg.data.u0 = FieldSpec::RandomBand {
            kmax: 1,
            amplitude: 1.0,
            seed,
        };
        cfg.data.f = FieldSpec::RandomBand {
            kmax: 1,
            amplitude: 0.05,
            seed: seed + 1,
        };
        cfg.data.g = vec![FieldSpec::RandomBand {
            kmax: 1,
            amplitude: 0.05,
            seed: seed + 2,
        }];
        let l2 = SpatialNorm::new(&grid, Derivative::Value, 0.0, 2.0)?;
        let paths = 1000usize;
        let errors = (0..paths)
            .into_par_iter()
            .map(|i| {
                let coeffs = sample_path(&family, 2, 2, &time, seed, i as u64)?;
                let data = build_data(&cfg, &grid, &coeffs)?;
                let w_fine = sample_wiener_refined(2, &time, REFERENCE, seed, i as u64)?;
                let reference =
                    solve_full(&data.refine(REFERENCE), &coeffs.refine(REFERENCE)?, &w_fine)?;
                let truth = reference.terminal();
                substeps
                    .iter()
                    .map(|&s| {
                        let w = w_fine.coarsen(REFERENCE / s)?;
                        let em = euler_maruyama_oracle(&data, &coeffs, &w, s)?;
                        let mut diff = em.terminal().clone();
                        diff.scale(-1.0);
                        diff.add_assign(truth);
                        l2.eval(&diff)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let mean: Vec<f64> = (0..substeps.len())
            .map(|j| errors.iter().map(|e| e[j]).sum::<f64>() / paths as f64)
            .collect();
        let lx: Vec<f64> = substeps.iter().map(|&s| (0.25 / s as f64).ln()).collect();
        let ly: Vec<f64> = mean.iter().map(|e| e.ln()).collect();
        let (slope, _, _) = fit_line(&lx, &ly);
        Ok((
            (0.4..=0.6).contains(&slope),
            format!(
                "fitted slope {slope:.3} (errors {:.2e}, {:.2e}, {:.2e}; window [0.4, 0.6])",
                mean[0], mean[1], mean[2]
            ),
        ))
    })
}

/// Config for the scaling fits; `p` is overridden per run.
pub fn kappa_config(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::with_family(
        &CoefficientFamily::ConstantElliptic {
            kappa: 1.0,
            sigma: 0.0,
        },
        1,
    );
    c.grid.n = 16;
    c.time = super::config::TimeConfig {
        horizon: 40.0,
        steps: 8000,
    };
    c.mc = super::config::McConfig { paths: 64, seed };
    c.data.u0 = FieldSpec::Mode {
        wavenumber: vec![1],
        amplitude: 1.0,
        phase: 0.0,
    };
    c.data.f = FieldSpec::Mode {
        wavenumber: vec![4],
        amplitude: 1.0,
        phase: 0.0,
    };
    c.data.g = vec![FieldSpec::Mode {
        wavenumber: vec![2],
        amplitude: 1.0,
        phase: 0.0,
    }];
    c
}

pub fn kappa_scaling(seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let mut out = timed(9, "kappa scaling", || {
        let mut passed = true;
        let mut parts = Vec::new();
        for p in [2.0, 4.0] {
            let mut cfg = kappa_config(seed);
            cfg.norms.p = p;
            for t in kappa_scaling_experiment(&cfg)?.terms {
                passed &= t.status == FitStatus::Pass;
                parts.push(format!(
                    "{}@p={}: {:.3} vs {:.3}",
                    t.term, p, t.slope, t.expected
                ));
            }
        }
        Ok((passed, format!("{} (tolerance 0.05)", parts.join(", "))))
    });
    out.passed &= start.elapsed().as_secs_f64() < 120.0;
    out.detail.push_str(", runtime limit 120 s");
    out
}

/// Config for the envelope runs: random degenerate families in `d = 2`.
pub fn envelope_config(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::with_family(
        &CoefficientFamily::RandomPsd {
            scale: 1.0,
            sigma_scale: 0.5,
            degenerate_prob: 0.5,
        },
        2,
    );
    c.grid = super::config::GridConfig {
        d: 2,
        n: 16,
        length: TAU,
    };
    c.time.steps = 64;
    c.mc = super::config::McConfig { paths: 32, seed };
    c.data.u0 = FieldSpec::RandomBand {
        kmax: 1,
        amplitude: 1.0,
        seed,
    };
    c.data.f = FieldSpec::RandomBand {
        kmax: 1,
        amplitude: 0.2,
        seed: seed + 1,
    };
    c.data.g = vec![
        FieldSpec::RandomBand {
            kmax: 1,
            amplitude: 0.1,
            seed: seed + 2,
        },
        FieldSpec::RandomBand {
            kmax: 1,
            amplitude: 0.1,
            seed: seed + 3,
        },
    ];
    c.data.mask_delta_below = Some(0.1);
    c
}

pub fn envelope(cfg: &ExperimentConfig) -> CriterionOutcome {
    timed(10, "estimate-B envelope stability", || {
        let r = estimate_b_envelope(cfg)?;
        let parts: Vec<String> = r
            .lines
            .iter()
            .map(|l| {
                format!(
                    "p={} γ={}: {:.3} -> {:.3} ({:.1}%)",
                    l.p,
                    l.gamma,
                    l.max_ratio,
                    l.max_ratio_refined,
                    100.0 * l.relative_change
                )
            })
            .collect();
        Ok((
            r.passed,
            format!("{} families; {} (limit 20%)", r.families, parts.join(", ")),
        ))
    })
}

/// Regularization `a + εI` along `ε = 0.2, 0.1, 0.05, 0.025` on a degenerate path.
pub fn regularization(seed: u64) -> CriterionOutcome {
    timed(11, "epsilon regularization", || {
        let grid = Grid::new(2, 16, TAU)?;
        let time = TimeGrid::uniform(1.0, 32)?;
        let family = CoefficientFamily::VanishingEigenvalue {
            kappa: 1.0,
            period: 2,
            sigma: 0.4,
        };
        let mut cfg = ExperimentConfig::with_family(&family, 2);
        cfg.grid = super::config::GridConfig {
            d: 2,
            n: 16,
            length: TAU,
        };
        cfg.data.u0 = FieldSpec::RandomBand {
            kmax: 3,
            amplitude: 1.0,
            seed,
        };
        cfg.data.f = FieldSpec::RandomBand {
            kmax: 2,
            amplitude: 0.5,
            seed: seed + 1,
        };
        let mut ok = true;
        let mut parts = Vec::new();
        for p in [2.0, 4.0] {
            let coeffs = sample_path(&family, 2, 2, &time, seed, 0)?;
            let w = sample_wiener(2, &time, seed, 0)?;
            let data = build_data(&cfg, &grid, &coeffs)?;
            let r = regularization_sweep(&data, &coeffs, &w, &[0.2, 0.1, 0.05, 0.025], p)?;
            ok &= r.monotone && r.remainder_bounded;
            let errs: Vec<String> = r
                .entries
                .iter()
                .map(|e| format!("{:.2e}", e.sup_error))
                .collect();
            parts.push(format!(
                "p={p}: errors {} monotone={} bounded={}",
                errs.join(" > "),
                r.monotone,
                r.remainder_bounded
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

/// All criteria in order. `envelope_cfg` drives criterion 10.
pub fn run_suite(seed: u64, envelope_cfg: &ExperimentConfig) -> Vec<CriterionOutcome> {
    vec![
        heat_exactness(),
        partition_of_unity(),
        besov_scaling(),
        feynman_kac_agreement(seed),
        sharpness(seed),
        ito_isometry(seed),
        time_change(seed),
        shift_convergence(seed),
        kappa_scaling(seed),
        envelope(envelope_cfg),
        regularization(seed),
    ]
}
