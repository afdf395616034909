use std::sync::Arc;

use deadcore::analysis::*;
use deadcore::io::{read_grid_function, write_grid_function};
use deadcore::{
    assemble, exact_local_profile, exponent_table, sample, solve_local, Error, ExteriorData, ExteriorShape, Grid,
    GridFunction, QuadratureConfig, ReactionSpec, SolverConfig, TailModel,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(a: f64, r: f64, h: f64) -> Arc<Grid> {
    Grid::new(a, r, h).unwrap()
}

fn profile_on(gamma: f64, g: &Arc<Grid>) -> GridFunction {
    exact_local_profile(gamma).unwrap().sample(g.clone()).unwrap()
}

fn dead_core_solve(h: f64) -> deadcore::SolveReport {
    let g = grid(4.0, 5.0, h);
    solve_local(g, (0.0, 1.0), &ReactionSpec::one_phase(0.2).unwrap(), &SolverConfig::default()).unwrap()
}

#[test]
fn dead_core_examples() {
    let g = grid(1.0, 2.0, 1.0 / 64.0);
    let z = GridFunction::zeros(g.clone());
    let rep = detect_dead_core(&z, 1e-12);
    assert_eq!(rep.intervals.len(), 1);
    let iv = rep.intervals[0];
    assert_eq!(iv.start..iv.end + 1, g.interior());
    assert!((rep.measure - g.n_interior() as f64 * g.h()).abs() < 1e-12);

    let rep = detect_dead_core(&profile_on(0.2, &g), 1e-12);
    assert_eq!(rep.intervals.len(), 1);
    assert_eq!(rep.intervals[0].x_start, 0.0);
    assert_eq!(rep.intervals[0].len(), 1);

    let sol = dead_core_solve(1.0 / 64.0);
    let rep = detect_dead_core(&sol.u, 1e-12);
    assert_eq!(rep.intervals.len(), 1);
    assert_eq!(rep.intervals[0].x_start, -4.0 + 1.0 / 64.0);
    assert!(rep.intervals[0].x_end > -4.0 + 1.0);
}

#[test]
fn branching_on_exact_profiles_is_the_origin() {
    for gamma in [0.1, 0.2, 0.3] {
        for k in [8, 9] {
            let g = grid(1.0, 2.0, 2f64.powi(-k));
            let u = profile_on(gamma, &g);
            let beta = 2.0 / (1.0 - gamma);
            let rep = detect_branching(&u, NuMode::Two, Tolerances::default_for(g.h(), beta)).unwrap();
            assert!(!rep.identically_zero);
            let pts = rep.points();
            assert_eq!(pts.len(), 1, "gamma = {gamma}, h = 2^-{k}: {:?}", rep.candidates);
            assert_eq!(pts[0].x0, 0.0);
            // The raw candidates form one run of adjacent nodes.
            assert!(rep.candidates.windows(2).all(|w| w[1].index == w[0].index + 1));
            assert_eq!(rep.nearest(0.3).unwrap().x0, 0.0);
        }
    }
}

#[test]
fn branching_trivial_cases() {
    let g = grid(1.0, 2.0, 1.0 / 32.0);
    let id = sample(|x| x, g.clone(), TailModel::Zero).unwrap();
    let tol = Tolerances::default_for(g.h(), 2.375);
    assert!(detect_branching(&id, NuMode::One, tol).unwrap().candidates.is_empty());
    let z = GridFunction::zeros(g.clone());
    let rep = detect_branching(&z, NuMode::Two, tol).unwrap();
    assert!(rep.identically_zero);
    assert_eq!(rep.candidates.len(), g.n_interior());

    let t = exponent_table(0.85, 0.2).unwrap();
    assert!(regime_warning(&t, NuMode::Two).is_some());
    let t = exponent_table(0.95, 0.2).unwrap();
    assert!(regime_warning(&t, NuMode::Two).is_none());
    assert!(regime_warning(&t, NuMode::One).is_some());
}

#[test]
fn fit_examples() {
    let g = grid(1.0, 2.0, 1.0 / 512.0);
    let u = profile_on(0.2, &g);
    let (r0, r1, k) = default_window(g.h(), 1.0);
    let fit = fit_growth_exponent(&u, 0.0, r0, r1, k, 0).unwrap();
    assert!((fit.slope - 2.5).abs() < 1e-2);
    assert!(fit.r_squared > 0.9999);
    assert!((fit.constant() - exact_local_profile(0.2).unwrap().kappa).abs() < 1e-6);
    let fit = fit_growth_exponent(&u, 0.0, r0, r1, k, 1).unwrap().with_target(1.5);
    assert!((fit.slope - 1.5).abs() < 2e-2);
    assert!(fit.relative_gap.unwrap() < 2e-2 / 1.5);
    assert!(fit.radii.windows(2).all(|w| w[1] > w[0]) && fit.radii[0] >= 2.0 * g.h());

    let sq = sample(|x| x * x, g.clone(), TailModel::Zero).unwrap();
    let fit = fit_growth_exponent(&sq, 0.0, r0, r1, k, 0).unwrap();
    assert!((fit.slope - 2.0).abs() < 1e-3);

    assert!(matches!(fit_growth_exponent(&sq, 0.0, 2.0 * g.h(), r1, k, 0), Err(Error::BadWindow(_))));
    assert!(matches!(fit_growth_exponent(&sq, 0.0, r0, r1, 3, 0), Err(Error::BadWindow(_))));
    let z = GridFunction::zeros(g.clone());
    assert!(matches!(fit_growth_exponent(&z, 0.0, r0, r1, k, 0), Err(Error::FlatFunction(_))));
    assert!(matches!(fit_growth_exponent(&sq, 1.8, r0, 0.5, k, 0), Err(Error::BallOutsideGrid { .. })));
}

#[test]
fn fit_recovers_pure_powers() {
    let g = grid(1.0, 2.0, 1.0 / 512.0);
    let (r0, r1, k) = default_window(g.h(), 1.0);
    for p in [1.5, 2.0, 2.5, 2.75] {
        let u = sample(|x: f64| x.abs().powf(p), g.clone(), TailModel::Zero).unwrap();
        let fit = fit_growth_exponent(&u, 0.0, r0, r1, k, 0).unwrap();
        assert!((fit.slope - p).abs() < 1e-3, "p = {p}: {}", fit.slope);
    }
}

#[test]
fn blow_up_examples() {
    let g = grid(1.0, 2.0, 1.0 / 64.0);
    let u = sample(|x: f64| (3.0 * x).sin() + x * x, g.clone(), TailModel::Zero).unwrap();
    let v = blow_up(&u, 0.0, 1.0, 0.95, 0.2).unwrap();
    assert_eq!(v.values, u.values);

    let p = profile_on(0.2, &g);
    for r in [0.5, 0.25, 0.125] {
        let v = blow_up(&p, 0.0, r, 1.0, 0.2).unwrap();
        let nodes = coincident_nodes(&p, 0.0, r);
        assert_eq!(nodes.len(), ((g.len() - 1) as f64 * r) as usize + 1);
        for i in nodes {
            assert!((v.values[i] - p.values[i]).abs() <= 1e-10, "r = {r}, x = {}", g.x(i));
        }
    }

    assert!(matches!(blow_up(&p, 0.5, 1.0, 1.0, 0.2), Err(Error::BallOutsideGrid { .. })));
    assert!(blow_up(&p, 0.0, 0.0, 1.0, 0.2).is_err());
    assert!(blow_up(&p, 0.0, 1.5, 1.0, 0.2).is_err());
}

#[test]
fn blow_up_and_fit_agree() {
    let g = grid(1.0, 4.0, 1.0 / 256.0);
    let u = sample(|x: f64| (x - 0.25).abs().powf(2.3) * (1.0 + x), g.clone(), TailModel::Zero).unwrap();
    let radii = geometric_radii(8.0 * g.h(), 0.25, 8, g.h());
    let base = fit_growth_exponent_with_radii(&u, 0.25, &radii, 0).unwrap();
    for r in [0.5, 0.25] {
        let v = blow_up(&u, 0.25, r, 0.95, 0.2).unwrap();
        let scaled: Vec<f64> = radii.iter().map(|q| q / r).collect();
        let fit = fit_growth_exponent_with_radii(&v, 0.0, &scaled, 0).unwrap();
        assert!((fit.slope - base.slope).abs() <= 1e-6, "{} vs {}", fit.slope, base.slope);
    }
}

#[test]
fn comparison_examples() {
    let g = grid(1.0, 3.0, 1.0 / 32.0);
    let op = assemble(g.clone(), 0.95, QuadratureConfig::default()).unwrap();
    let spec = ReactionSpec::two_phase(0.2).unwrap();
    let cfg = SolverConfig::default();
    let g1 = ExteriorData::new(ExteriorShape::Ramp, 1.0).unwrap().sample(g.clone()).unwrap();
    let same = comparison_check(&op, &spec, &g1, &g1, &cfg).unwrap();
    assert!(same.holds);
    assert_eq!(same.max_violation, 0.0);

    let mut g2 = g1.clone();
    for j in g.exterior() {
        g2.values[j] -= 0.1;
    }
    g2.tail = TailModel::Constant { left: -1.1, right: 0.9 };
    assert!(comparison_check(&op, &spec, &g1, &g2, &cfg).unwrap().holds);
    assert!(matches!(comparison_check(&op, &spec, &g2, &g1, &cfg), Err(Error::Unordered(_))));
    let mut g3 = g1.clone();
    g3.tail = TailModel::Constant { left: -0.5, right: 1.0 };
    assert!(matches!(comparison_check(&op, &spec, &g1, &g3, &cfg), Err(Error::Unordered(_))));
}

#[test]
fn random_pairs_are_ordered_and_reproducible() {
    let g = grid(1.0, 3.0, 1.0 / 16.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (a, b) = random_ordered_pair(&g, &mut rng).unwrap();
        assert!(g.exterior().all(|j| a.values[j] >= b.values[j]));
        assert!(g.interior().all(|i| a.values[i] == 0.0 && b.values[i] == 0.0));
        assert!(a.tail.dominates(&b.tail, 3.0));
    }
    let op = assemble(g.clone(), 0.9, QuadratureConfig::default()).unwrap();
    let spec = ReactionSpec::two_phase(0.2).unwrap();
    let cfg = SolverConfig::default();
    let s1 = comparison_campaign(&op, &spec, &cfg, 10, 3).unwrap();
    let s2 = comparison_campaign(&op, &spec, &cfg, 10, 3).unwrap();
    assert_eq!(s1, s2);
    assert_eq!(s1.failures, 0);
    assert_eq!(s1.outcomes.len(), 10);
}

#[test]
fn liouville_examples() {
    let g = grid(1.0, 8.0, 1.0 / 16.0);
    let radii = [1.0, 2.0, 4.0, 8.0];
    let z = GridFunction::zeros(g.clone());
    let rep = liouville_probe(&z, 0.95, 0.2, &radii, true, 1e-9).unwrap();
    assert_eq!(rep.class, GrowthClass::Decaying);
    assert_eq!(rep.conclusion_holds, Some(true));

    let p = profile_on(0.2, &g);
    let rep = liouville_probe(&p, 1.0, 0.2, &radii, false, 1e-9).unwrap();
    assert_eq!(rep.class, GrowthClass::Critical);
    let kappa = exact_local_profile(0.2).unwrap().kappa;
    assert!(rep.q.iter().all(|q| (q - kappa).abs() <= 1e-10));

    let id = sample(|x| x, g.clone(), TailModel::Zero).unwrap();
    let rep = liouville_probe(&id, 0.95, 0.2, &radii, false, 1e-9).unwrap();
    assert_eq!(rep.class, GrowthClass::Decaying);
    assert_eq!(rep.conclusion_holds, None);
    for (q, r) in rep.q.iter().zip(radii) {
        assert!((q - f64::powf(r, -1.375)).abs() < 1e-12);
    }

    let cube = sample(|x: f64| x.powi(4), g.clone(), TailModel::Zero).unwrap();
    assert_eq!(liouville_probe(&cube, 0.95, 0.2, &radii, false, 1e-9).unwrap().class, GrowthClass::Growing);
    assert!(liouville_probe(&z, 0.95, 0.2, &[2.0, 1.0], true, 1e-9).is_err());
}

#[test]
fn free_boundary_checks() {
    let sol = dead_core_solve(1.0 / 128.0);
    let chk = one_phase_branching_check(&sol).unwrap();
    assert!(chk.passed, "{chk:?}");
    assert!((chk.x_star - (4.0 - 1.9365)).abs() <= 4.0 / 128.0);

    let g = grid(1.0, 2.0, 1.0 / 128.0);
    let p = profile_on(0.2, &g);
    let chk = free_boundary_branching_check(&p, 0.2, 1e-3 * g.h().powf(2.5)).unwrap();
    assert!(chk.passed);
    assert_eq!(chk.x_star, 0.0);

    let g = grid(4.0, 5.0, 1.0 / 64.0);
    let big = solve_local(g, (0.0, 100.0), &ReactionSpec::one_phase(0.2).unwrap(), &SolverConfig::default()).unwrap();
    assert!(matches!(one_phase_branching_check(&big), Err(Error::NoFreeBoundary)));

    let two = solve_local(grid(1.0, 2.0, 1.0 / 32.0), (0.0, 0.0), &ReactionSpec::two_phase(0.2).unwrap(), &SolverConfig::default()).unwrap();
    assert!(one_phase_branching_check(&two).is_err());
}

#[test]
fn s_limit_with_zero_data() {
    let g = grid(1.0, 3.0, 1.0 / 16.0);
    let data = ExteriorData::new(ExteriorShape::Ramp, 0.0).unwrap();
    let spec = ReactionSpec::two_phase(0.2).unwrap();
    let rows = s_limit_study(g, &data, &spec, &[0.8, 0.9, 0.95, 0.99], &SolverConfig::default(), &SLimitOptions::default()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.distance == 0.0 && r.slope.is_none()));
}

#[test]
fn grid_function_csv_roundtrip() {
    let g = grid(1.0, 2.0, 1.0 / 16.0);
    let u = sample(|x: f64| (7.0 * x).sin() / 3.0, g.clone(), TailModel::power_sided(-0.5, 2.0, 1.25).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_grid_function(&u, &mut buf).unwrap();
    let back = read_grid_function(g.clone(), buf.as_slice()).unwrap();
    assert_eq!(back, u);
    let other = grid(1.0, 2.0, 1.0 / 8.0);
    assert!(read_grid_function(other, buf.as_slice()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dead_core_intervals_disjoint_sorted(seed in prop::collection::vec(-1.0f64..1.0, 8), tau in 0.01f64..0.5) {
        let g = grid(1.0, 2.0, 1.0 / 32.0);
        let u = sample(|x: f64| seed.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * x).sin()).sum(), g.clone(), TailModel::Zero).unwrap();
        let rep = detect_dead_core(&u, tau);
        for w in rep.intervals.windows(2) {
            prop_assert!(w[0].end + 1 < w[1].start);
        }
        for iv in &rep.intervals {
            prop_assert!((iv.start..=iv.end).all(|i| u.values[i].abs() <= tau));
        }
    }

    #[test]
    fn branching_candidates_meet_tolerances(shift in -0.5f64..0.5, p in 1.5f64..3.0) {
        let g = grid(1.0, 2.0, 1.0 / 64.0);
        let u = sample(|x: f64| (x - shift).abs().powf(p), g.clone(), TailModel::Zero).unwrap();
        let tol = Tolerances::default_for(g.h(), 2.375);
        let rep = detect_branching(&u, NuMode::Two, tol).unwrap();
        for c in &rep.candidates {
            prop_assert!(c.u <= tol.tau0 && c.du <= tol.tau1 && c.d2u <= tol.tau2);
        }
    }

    #[test]
    fn fit_r_squared_in_unit_interval(a in 0.1f64..3.0, p in 1.0f64..3.0, b in 0.0f64..1.0) {
        let g = grid(1.0, 2.0, 1.0 / 128.0);
        let u = sample(|x: f64| a * x.abs().powf(p) + b * x.abs(), g.clone(), TailModel::Zero).unwrap();
        let (r0, r1, k) = default_window(g.h(), 1.0);
        let fit = fit_growth_exponent(&u, 0.0, r0, r1, k, 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&fit.r_squared));
    }
}
