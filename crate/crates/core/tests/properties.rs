use approx::assert_relative_eq;
use proptest::prelude::*;

use spde_lab::coefficient_model::{
    sample_path, weight_value, CoefficientFamily, Matrix, TimeGrid, WeightKind,
};
use spde_lab::littlewood_paley::build_partition;
use spde_lab::pde_solver::{solve_deterministic, Forcing};
use spde_lab::regularity_harness::{verify_estimate_a, ExperimentConfig, FieldSpec};
use spde_lab::spde_solver::{solve_full, SpdeData};
use spde_lab::spectral_grid::{lp_norm, sobolev_norm};
use spde_lab::stochastic_drivers::sample_wiener;
use spde_lab::{CoefficientPath64, Field64, Grid64};

use std::f64::consts::TAU;

fn field(n: usize, vals: &[f64]) -> Field64 {
    Field64::from_real(Grid64::new(1, n, TAU).unwrap(), vals.to_vec()).unwrap()
}

fn elliptic(kappa: f64, steps: usize) -> CoefficientPath64 {
    let t = TimeGrid::uniform(1.0, steps).unwrap();
    CoefficientPath64::noiseless(
        t,
        vec![Matrix::diagonal(&[kappa]); steps],
        "constant_elliptic",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(vals in prop::collection::vec(-10.0f64..10.0, 32)) {
        let u = field(32, &vals);
        let back = u.forward().inverse();
        prop_assert!(back.max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn parseval(vals in prop::collection::vec(-10.0f64..10.0, 16)) {
        let u = field(16, &vals);
        let l2 = lp_norm(&u, 2.0).unwrap();
        assert_relative_eq!(l2 * l2, u.forward().l2_norm_sq(), max_relative = 1e-12);
    }

    #[test]
    fn grid_shifts_preserve_lp(vals in prop::collection::vec(-5.0f64..5.0, 16), j in 0usize..16, p in 2.0f64..6.0) {
        let u = field(16, &vals);
        let h = u.grid().spacing();
        let moved = u.forward().translate(&[j as f64 * h]).inverse();
        assert_relative_eq!(lp_norm(&moved, p).unwrap(), lp_norm(&u, p).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn sobolev_norm_grows_with_order(vals in prop::collection::vec(-5.0f64..5.0, 16), g in -1.0f64..2.0) {
        let u = field(16, &vals);
        let lo = sobolev_norm(&u, g, 2.0).unwrap();
        let hi = sobolev_norm(&u, g + 0.5, 2.0).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12));
    }

    #[test]
    fn besov_norm_is_homogeneous(vals in prop::collection::vec(-5.0f64..5.0, 32), c in 0.1f64..10.0, p in 2.0f64..5.0) {
        let u = field(32, &vals);
        let scaled = field(32, &vals.iter().map(|v| c * v).collect::<Vec<_>>());
        let part = build_partition(u.grid()).unwrap();
        let a = part.besov_norm(&u, 0.5, p).unwrap();
        assert_relative_eq!(part.besov_norm(&scaled, 0.5, p).unwrap(), c * a, max_relative = 1e-10);
    }

    #[test]
    fn weights_order_in_delta(p in 2.0f64..8.0, d1 in 1e-6f64..10.0, d2 in 1e-6f64..10.0, s in 0.0f64..3.0) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let w = |k, d| weight_value(k, p, d, s).unwrap();
        prop_assert!(w(WeightKind::Delta, lo) <= w(WeightKind::Delta, hi));
        prop_assert!(w(WeightKind::DeltaPow1MinusP, lo) >= w(WeightKind::DeltaPow1MinusP, hi));
        prop_assert!(w(WeightKind::DeltaPow1MinusHalfP, lo) >= w(WeightKind::DeltaPow1MinusHalfP, hi) * (1.0 - 1e-14));
        prop_assert_eq!(w(WeightKind::Unit, lo), 1.0);
        prop_assert!(weight_value(WeightKind::Unit, 1.9, lo, s).is_err());
    }

    #[test]
    fn heat_flow_contracts_every_lp(vals in prop::collection::vec(-5.0f64..5.0, 16), kappa in 0.0f64..2.0, p in 2.0f64..6.0) {
        let u0 = field(16, &vals);
        let traj = solve_deterministic(&u0.forward(), &Forcing::zero(), &elliptic(kappa, 4)).unwrap();
        let end = traj.terminal().inverse();
        prop_assert!(lp_norm(&end, p).unwrap() <= lp_norm(&u0, p).unwrap() * (1.0 + 1e-10));
    }

    #[test]
    fn pathwise_solution_is_linear_in_data(
        a in prop::collection::vec(-2.0f64..2.0, 16),
        b in prop::collection::vec(-2.0f64..2.0, 16),
        c in -3.0f64..3.0,
        seed in 0u64..1000,
    ) {
        let fam = CoefficientFamily::RandomPsd { scale: 1.0, sigma_scale: 0.7, degenerate_prob: 0.5 };
        let t = TimeGrid::uniform(1.0, 8).unwrap();
        let coeffs = sample_path(&fam, 1, 2, &t, seed, 0).unwrap();
        let w = sample_wiener(2, &t, seed, 0).unwrap();
        let solve = |u: &Field64| solve_full(&SpdeData::new(u.forward()), &coeffs, &w).unwrap();
        let ua = field(16, &a);
        let ub = field(16, &b);
        let mix = field(16, &a.iter().zip(&b).map(|(x, y)| x + c * y).collect::<Vec<_>>());
        let (sa, sb, sm) = (solve(&ua), solve(&ub), solve(&mix));
        let mut want = sb.terminal().clone();
        want.scale(c);
        want.add_assign(sa.terminal());
        prop_assert!(sm.terminal().max_abs_diff(&want) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // Both sides of the sup estimate are p-th powers of linear functionals of
    // the data, so scaling every datum by c leaves the ratio unchanged.
    #[test]
    fn estimate_a_ratio_is_scale_free(c in 0.2f64..5.0, seed in 0u64..100) {
        let mut cfg = ExperimentConfig::with_family(
            &CoefficientFamily::VanishingEigenvalue { kappa: 1.0, period: 2, sigma: 0.5 },
            1,
        );
        cfg.grid.n = 16;
        cfg.time.steps = 8;
        cfg.mc.paths = 4;
        cfg.mc.seed = seed;
        let data = |amp: f64| {
            let mut d = cfg.data.clone();
            d.u0 = FieldSpec::RandomBand { kmax: 3, amplitude: amp, seed: 1 };
            d.f = FieldSpec::Mode { wavenumber: vec![2], amplitude: 0.5 * amp, phase: 0.0 };
            d.g = vec![FieldSpec::Mode { wavenumber: vec![1], amplitude: 0.3 * amp, phase: 0.2 }];
            d
        };
        let mut base = cfg.clone();
        base.data = data(1.0);
        let mut scaled = cfg.clone();
        scaled.data = data(c);
        let r1 = verify_estimate_a(&base).unwrap();
        let r2 = verify_estimate_a(&scaled).unwrap();
        assert_relative_eq!(r1.ratio, r2.ratio, max_relative = 1e-9);
        assert_relative_eq!(r2.lhs, c * c * r1.lhs, max_relative = 1e-9);
    }
}
