//! `spde-lab` command-line runner.
//!
//! Exit status: 0 on success, 2 when an experiment reports a violated estimate
//! or failed check, 1 on usage, configuration or I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use spde_lab::coefficient_model::sample_path;
use spde_lab::littlewood_paley::build_partition;
use spde_lab::pde_solver::solve_deterministic;
use spde_lab::regularity_harness::{
    build_data, estimates_csv, kappa_scaling_experiment, parse_config, report_json,
    sharpness_experiment, suite, timechange_check, verify_estimate_a, verify_estimate_b,
    write_estimates, EstimateReport, EstimateStatus, ExperimentConfig,
};
use spde_lab::spde_solver::solve_full;
use spde_lab::spectral_grid::lp_norm;
use spde_lab::stochastic_drivers::sample_wiener;
use spde_lab::LabError;

#[derive(Parser)]
#[command(
    name = "spde-lab",
    version,
    about = "Spectral experiments for degenerate linear SPDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deterministic solve (σ = 0, g = 0) on coefficient path 0.
    SolveDet(Common),
    /// Pathwise SPDE solves; writes terminal norms and the first trajectory.
    SolveSpde(Common),
    /// Besov norms of the configured data fields.
    BesovNorm(Common),
    /// Sup-in-time estimate.
    VerifyA(Common),
    /// Weighted Hessian estimate.
    VerifyB(Common),
    /// κ-scaling slopes of the isolated data terms.
    KappaScaling(Common),
    /// No-smoothing check for fully degenerate coefficients.
    Sharpness(Common),
    /// Direct solve against the time-changed solve on random families.
    TimechangeCheck(Common),
    /// Full acceptance suite; the config drives the envelope experiment.
    Suite(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `mc.paths`.
    #[arg(long)]
    paths: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Outcome {
    Ok,
    Failed,
}

type Run = Result<Outcome, LabError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SPDE_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("SPDE_LAB_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("SPDE_LAB_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load(c: &Common) -> Result<ExperimentConfig, LabError> {
    let mut cfg = parse_config(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.mc.seed = seed;
    }
    if let Some(paths) = c.paths {
        cfg.mc.paths = paths;
    }
    cfg.validate()?;
    fs::create_dir_all(&c.out)?;
    Ok(cfg)
}

fn run(cmd: Command) -> Run {
    match cmd {
        Command::SolveDet(c) => solve_det(&c),
        Command::SolveSpde(c) => solve_spde(&c),
        Command::BesovNorm(c) => besov(&c),
        Command::VerifyA(c) => estimate(&c, "estimate_a", verify_estimate_a),
        Command::VerifyB(c) => estimate(&c, "estimate_b", verify_estimate_b),
        Command::KappaScaling(c) => kappa(&c),
        Command::Sharpness(c) => sharpness(&c),
        Command::TimechangeCheck(c) => timechange(&c),
        Command::Suite(c) => run_suite(&c),
    }
}

fn write_json<R: serde::Serialize>(
    out: &Path,
    name: &str,
    cfg: &ExperimentConfig,
    report: &R,
) -> Result<(), LabError> {
    fs::write(out.join(name), report_json(cfg, report)?)?;
    Ok(())
}

fn solve_det(c: &Common) -> Run {
    let cfg = load(c)?;
    let grid = cfg.grid()?;
    let coeffs = sample_path(
        &cfg.family()?,
        grid.dim(),
        cfg.coefficients.drivers,
        &cfg.time_grid()?,
        cfg.mc.seed,
        0,
    )?;
    let data = build_data(&cfg, &grid, &coeffs)?;
    let traj = solve_deterministic(&data.u0, &data.f, &coeffs)?;
    let dir = c.out.join("solve_det");
    traj.dump(&dir, Some(&coeffs))?;
    fs::write(dir.join("config.json"), report_json(&cfg, &"solve_det")?)?;
    let norm = lp_norm(&traj.terminal().inverse(), 2.0)?;
    println!(
        "solve-det: {} steps, |u(T)|_L2 = {norm:.6e}, config {} -> {}",
        traj.time().intervals(),
        cfg.hash(),
        dir.display()
    );
    Ok(Outcome::Ok)
}

fn solve_spde(c: &Common) -> Run {
    let cfg = load(c)?;
    let grid = cfg.grid()?;
    let time = cfg.time_grid()?;
    let family = cfg.family()?;
    let k = cfg.coefficients.drivers;
    let seed = cfg.mc.seed;
    let dir = c.out.join("solve_spde");
    let norms = (0..cfg.mc.paths)
        .into_par_iter()
        .map(|i| {
            let coeffs = sample_path(&family, grid.dim(), k, &time, seed, i as u64)?;
            let w = sample_wiener(k, &time, seed, i as u64)?;
            let data = build_data(&cfg, &grid, &coeffs)?;
            let traj = solve_full(&data, &coeffs, &w)?;
            if i == 0 {
                traj.dump(dir.join("path_0000"), Some(&coeffs))?;
            }
            lp_norm(&traj.terminal().inverse(), 2.0)
        })
        .collect::<Result<Vec<f64>, LabError>>()?;
    let hash = cfg.hash();
    let mut csv = String::from("path,terminal_l2,seed,config_hash\n");
    for (i, n) in norms.iter().enumerate() {
        let _ = writeln!(csv, "{i},{n:e},{seed},{hash}");
    }
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("terminal_norms.csv"), csv)?;
    fs::write(dir.join("config.json"), report_json(&cfg, &"solve_spde")?)?;
    let mean = norms.iter().sum::<f64>() / norms.len().max(1) as f64;
    println!(
        "solve-spde: {} paths, mean |u(T)|_L2 = {mean:.6e}, config {hash} -> {}",
        norms.len(),
        dir.display()
    );
    Ok(Outcome::Ok)
}

fn besov(c: &Common) -> Run {
    let cfg = load(c)?;
    let grid = cfg.grid()?;
    let part = build_partition(&grid)?;
    let (gamma, p) = (cfg.norms.gamma, cfg.norms.p);
    let mut fields = vec![("u0".to_string(), cfg.data.u0.build(&grid, Some(&cfg), 0)?)];
    if !cfg.data.f.is_zero() {
        fields.push(("f".into(), cfg.data.f.build(&grid, Some(&cfg), 1)?));
    }
    for (k, g) in cfg.data.g.iter().enumerate() {
        if !g.is_zero() {
            fields.push((format!("g{k}"), g.build(&grid, Some(&cfg), 2 + k as u64)?));
        }
    }
    let hash = cfg.hash();
    let mut csv = String::from("field,gamma,p,besov,homogeneous_besov,config_hash\n");
    let mut rows = Vec::new();
    let mut u0_norm = 0.0;
    for (name, field) in &fields {
        let b = part.besov_norm(field, gamma, p)?;
        let h = part.homogeneous_besov_norm(field, gamma, p)?;
        if name == "u0" {
            u0_norm = b;
        }
        let _ = writeln!(csv, "{name},{gamma},{p},{b:e},{h:e},{hash}");
        rows.push(serde_json::json!({ "field": name, "besov": b, "homogeneous_besov": h }));
    }
    fs::write(c.out.join("besov_norm.csv"), csv)?;
    write_json(&c.out, "besov_norm.json", &cfg, &rows)?;
    println!(
        "besov-norm: {} fields at gamma={gamma} p={p}, u0 = {u0_norm:.6e}, config {hash} -> {}",
        rows.len(),
        c.out.display()
    );
    Ok(Outcome::Ok)
}

fn estimate(
    c: &Common,
    stem: &str,
    verify: fn(&ExperimentConfig) -> spde_lab::Result<EstimateReport>,
) -> Run {
    let cfg = load(c)?;
    let r = verify(&cfg)?;
    write_estimates(&c.out, stem, &cfg, std::slice::from_ref(&r))?;
    println!(
        "{stem}: status={} ratio={:.6e} lhs={:.6e}±{:.1e} rhs={:.6e} paths={} seed={} config {} -> {}",
        r.status.as_str(),
        r.ratio,
        r.lhs,
        r.lhs_stderr,
        r.rhs_total,
        r.n_paths,
        r.seed,
        cfg.hash(),
        c.out.join(format!("{stem}.csv")).display()
    );
    Ok(if r.status == EstimateStatus::Violation {
        Outcome::Failed
    } else {
        Outcome::Ok
    })
}

fn kappa(c: &Common) -> Run {
    let cfg = load(c)?;
    let r = kappa_scaling_experiment(&cfg)?;
    fs::write(c.out.join("kappa_scaling.csv"), r.csv(&cfg.hash()))?;
    write_json(&c.out, "kappa_scaling.json", &cfg, &r)?;
    let slopes: Vec<String> = r
        .terms
        .iter()
        .map(|t| {
            format!(
                "{} {:.3} (expected {:.3}, {:?})",
                t.term, t.slope, t.expected, t.status
            )
        })
        .collect();
    println!(
        "kappa-scaling: p={} {}; config {} -> {}",
        r.p,
        slopes.join(", "),
        cfg.hash(),
        c.out.display()
    );
    Ok(if r.passed() {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}

fn sharpness(c: &Common) -> Run {
    let cfg = load(c)?;
    let r = sharpness_experiment(&cfg)?;
    let rows = [r.ratio_u0.clone(), r.ratio_full.clone()];
    fs::write(
        c.out.join("sharpness.csv"),
        estimates_csv(&rows, &cfg.hash()),
    )?;
    write_json(&c.out, "sharpness.json", &cfg, &r)?;
    println!(
        "sharpness: {} paths, identity error {:.2e}, no-gain gap {:.2e}, ratio {:.6} ({}), config {} -> {}",
        r.paths,
        r.max_identity_error,
        r.max_no_gain_gap,
        r.ratio_u0.ratio,
        if r.passed { "pass" } else { "fail" },
        cfg.hash(),
        c.out.display()
    );
    Ok(if r.passed {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}

fn timechange(c: &Common) -> Run {
    let cfg = load(c)?;
    let r = timechange_check(&cfg)?;
    write_json(&c.out, "timechange_check.json", &cfg, &r)?;
    println!(
        "timechange-check: {} families ({} skipped), max relative difference {:.2e} ({}), config {} -> {}",
        r.families,
        r.skipped,
        r.max_difference,
        if r.passed { "pass" } else { "fail" },
        cfg.hash(),
        c.out.display()
    );
    Ok(if r.passed {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}

fn run_suite(c: &Common) -> Run {
    let cfg = load(c)?;
    let outcomes = suite::run_suite(cfg.mc.seed, &cfg);
    let mut text = String::new();
    for o in &outcomes {
        println!("{}", o.line());
        let _ = writeln!(text, "{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    fs::write(c.out.join("suite.txt"), &text)?;
    write_json(&c.out, "suite.json", &cfg, &outcomes)?;
    println!(
        "suite: {} of {} criteria passed, config {} -> {}",
        outcomes.len() - failed,
        outcomes.len(),
        cfg.hash(),
        c.out.display()
    );
    Ok(if failed == 0 {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}
