use std::f64::consts::PI;

use deadcore::grid::{discrete_derivative, holder_seminorm, sup_on_ball, tail_norm};
use deadcore::{exact_local_profile, make_grid, sample, Error, Grid, GridSpec, TailModel};
use proptest::prelude::*;

#[test]
fn node_counts() {
    let g = make_grid(GridSpec::new(1.0, 4.0, 0.25).unwrap());
    assert_eq!(g.len(), 33);
    assert_eq!(g.n_interior(), 7);
    assert!(g.interior().all(|i| g.x(i).abs() < 1.0));
    assert!(g.exterior().all(|i| g.x(i).abs() >= 1.0));
    assert_eq!(g.interior().count() + g.exterior().count(), g.len());
    for (i, &x) in g.nodes().iter().enumerate() {
        assert_eq!(x, -4.0 + i as f64 * 0.25);
    }
    assert_eq!(make_grid(GridSpec::new(1.0, 2.0, 1.0 / 64.0).unwrap()).len(), 257);
    assert!(matches!(GridSpec::new(1.0, 1.5, 0.3), Err(Error::InvalidGrid(_))));
}

#[test]
fn guideline_warnings() {
    assert!(GridSpec::new(1.0, 8.0, 1.0 / 64.0).unwrap().warnings().is_empty());
    assert_eq!(GridSpec::new(1.0, 2.0, 0.5).unwrap().warnings().len(), 2);
}

#[test]
fn sample_examples() {
    let g = Grid::new(1.0, 2.0, 0.5).unwrap();
    let z = sample(|_| 0.0, g.clone(), TailModel::Zero).unwrap();
    assert!(z.values.iter().all(|&v| v == 0.0));
    let id = sample(|x| x, g.clone(), TailModel::Zero).unwrap();
    assert_eq!(id.values, vec![-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]);
    assert!(sample(|x| 1.0 / x, g, TailModel::Zero).is_err());

    let p = exact_local_profile(0.2).unwrap();
    let g = Grid::new(1.0, 2.0, 1.0 / 16.0).unwrap();
    let u = p.sample(g.clone()).unwrap();
    for (&x, &v) in g.nodes().iter().zip(&u.values) {
        let k = 3.75f64.powf(-1.25);
        let want = if x >= 0.0 { k * x.powf(2.5) } else { -k * (-x).powf(2.5) };
        assert!((v - want).abs() <= 1e-15 * want.abs().max(1.0));
    }
}

#[test]
fn sup_examples() {
    let g = Grid::new(1.0, 2.0, 0.25).unwrap();
    let z = sample(|_| 0.0, g.clone(), TailModel::Zero).unwrap();
    assert_eq!(sup_on_ball(&z, 0.3, 1.0).unwrap(), 0.0);
    let id = sample(|x| x, g.clone(), TailModel::Zero).unwrap();
    assert_eq!(sup_on_ball(&id, 0.0, 0.5).unwrap(), 0.5);
    let p = exact_local_profile(0.2).unwrap();
    let u = p.sample(g.clone()).unwrap();
    let v = sup_on_ball(&u, 0.0, 0.25).unwrap();
    assert!((v - p.kappa * 0.25f64.powf(2.5)).abs() < 1e-15);
    assert!((v - 5.99e-3).abs() < 1e-5);
    assert!(matches!(sup_on_ball(&u, 1.8, 0.5), Err(Error::BallOutsideGrid { .. })));
    assert!(matches!(sup_on_ball(&u, 0.0, 0.1), Err(Error::RadiusTooSmall { .. })));
}

#[test]
fn derivative_examples() {
    let g = Grid::new(1.0, 2.0, 1.0 / 8.0).unwrap();
    let q = sample(|x| x * x, g.clone(), TailModel::Zero).unwrap();
    let d2 = discrete_derivative(&q, 2).unwrap();
    assert!(d2.values.iter().all(|&v| (v - 2.0).abs() < 1e-9));
    let d1 = discrete_derivative(&q, 1).unwrap();
    for (&x, &v) in g.nodes().iter().zip(&d1.values) {
        assert!((v - 2.0 * x).abs() < 1e-11, "{x}");
    }
    let c = sample(|_| 3.0, g.clone(), TailModel::Zero).unwrap();
    for k in [1, 2] {
        assert!(discrete_derivative(&c, k).unwrap().values.iter().all(|&v| v.abs() < 1e-12));
    }
    assert!(matches!(discrete_derivative(&c, 3), Err(Error::BadOrder(3))));

    // Profile second derivative at 0.5: κβ(β-1) 0.5^{β-2}.
    let p = exact_local_profile(0.2).unwrap();
    let want = p.kappa * 2.5 * 1.5 * 0.5f64.powf(0.5);
    assert!((want - 0.5081).abs() < 1e-4);
    let g = Grid::new(1.0, 2.0, 1.0 / 256.0).unwrap();
    let u = p.sample(g.clone()).unwrap();
    let d2 = discrete_derivative(&u, 2).unwrap();
    let i = g.node_at(0.5).unwrap();
    assert!((d2.values[i] - want).abs() < 1e-4);
}

#[test]
fn holder_examples() {
    let g = Grid::new(1.0, 2.0, 1.0 / 32.0).unwrap();
    let c = sample(|_| 2.0, g.clone(), TailModel::Zero).unwrap();
    assert_eq!(holder_seminorm(&c, 0.5, 0.0, 1.0, 0).unwrap(), 0.0);
    let id = sample(|x| x, g.clone(), TailModel::Zero).unwrap();
    assert!((holder_seminorm(&id, 1.0, 0.0, 1.0, 0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn holder_profile_second_derivative() {
    // D²u* = c sign(x)|x|^{1/2} with c = κβ(β-1). Over B_1 the ratio
    // |D²u(x) - D²u(y)| / |x-y|^{1/2} is maximal for the symmetric pair
    // y = -x, where it equals 2c√x / √(2x) = √2 c.
    let p = exact_local_profile(0.2).unwrap();
    let c = p.kappa * p.beta * (p.beta - 1.0);
    let oracle = 2f64.sqrt() * c;
    assert!((oracle - 1.0163).abs() < 1e-3);
    let g = Grid::new(1.0, 2.0, 1.0 / 512.0).unwrap();
    let u = p.sample(g).unwrap();
    let v = holder_seminorm(&u, 0.5, 0.0, 1.0, 2).unwrap();
    assert!((v - oracle).abs() < 1e-2, "{v} vs {oracle}");
}

#[test]
fn tail_norm_examples() {
    let g = Grid::new(1.0, 64.0, 1.0 / 128.0).unwrap();
    let z = sample(|_| 0.0, g.clone(), TailModel::Zero).unwrap();
    assert_eq!(tail_norm(&z, 0.5).unwrap(), 0.0);
    let one = sample(|_| 1.0, g, TailModel::constant(1.0)).unwrap();
    assert!((tail_norm(&one, 0.5).unwrap() - PI).abs() < 1e-3);

    // Indicator of [-1, 1]: the trapezoid rule smears each jump over half a
    // cell, an O(h) error, so this check needs h = 2^-10.
    let g = Grid::new(1.0, 2.0, 1.0 / 1024.0).unwrap();
    let ind = sample(|x| if x.abs() <= 1.0 { 1.0 } else { 0.0 }, g, TailModel::Zero).unwrap();
    assert!((tail_norm(&ind, 0.5).unwrap() - PI / 2.0).abs() < 1e-3);
}

#[test]
fn tail_norm_power_tail_matches_quadrature() {
    // Far field y^{-2} for |y| > 4 with s = 0.75: ∫_4^∞ y^{-2}/(1+y^{2.5}) dy,
    // oracle by substitution y = 4/t and midpoint refinement.
    let g = Grid::new(1.0, 4.0, 0.25).unwrap();
    let u = sample(|_| 0.0, g, TailModel::power(1.0, 2.0).unwrap()).unwrap();
    let n = 200_000;
    let mut acc = 0.0;
    for k in 0..n {
        let t = (k as f64 + 0.5) / n as f64;
        let y: f64 = 4.0 / t;
        acc += y.powi(-2) / (1.0 + y.powf(2.5)) * 4.0 / (t * t);
    }
    let oracle = 2.0 * acc / n as f64;
    assert!((tail_norm(&u, 0.75).unwrap() - oracle).abs() < 1e-9 * oracle);
}

fn poly(c: [f64; 4]) -> impl Fn(f64) -> f64 {
    move |x| c[0] + x * (c[1] + x * (c[2] + x * c[3]))
}

proptest! {
    #[test]
    fn lattice_exactness(c in prop::array::uniform4(-4.0f64..4.0), k in 2u32..6) {
        let h = 2f64.powi(-(k as i32));
        let g = Grid::new(1.0, 2.0, h).unwrap();
        let f = poly(c);
        let u = sample(&f, g.clone(), TailModel::Zero).unwrap();
        for (i, &x) in g.nodes().iter().enumerate() {
            prop_assert_eq!(u.values[i].to_bits(), f(x).to_bits());
        }
    }

    #[test]
    fn sup_monotone_in_radius(c in prop::array::uniform4(-4.0f64..4.0), x0 in -0.5f64..0.5,
                              r1 in 0.05f64..1.0, dr in 0.0f64..0.4) {
        let g = Grid::new(1.0, 2.0, 1.0 / 32.0).unwrap();
        let u = sample(poly(c), g, TailModel::Zero).unwrap();
        let a = sup_on_ball(&u, x0, r1).unwrap();
        let b = sup_on_ball(&u, x0, r1 + dr).unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn derivative_linear(c1 in prop::array::uniform4(-4.0f64..4.0), c2 in prop::array::uniform4(-4.0f64..4.0),
                         al in -3.0f64..3.0, be in -3.0f64..3.0, order in 1usize..3) {
        let g = Grid::new(1.0, 2.0, 1.0 / 16.0).unwrap();
        let u = sample(|x| x.sin() + poly(c1)(x), g.clone(), TailModel::Zero).unwrap();
        let v = sample(poly(c2), g.clone(), TailModel::Zero).unwrap();
        let mix = sample(|x| al * (x.sin() + poly(c1)(x)) + be * poly(c2)(x), g, TailModel::Zero).unwrap();
        let (du, dv, dm) = (
            discrete_derivative(&u, order).unwrap(),
            discrete_derivative(&v, order).unwrap(),
            discrete_derivative(&mix, order).unwrap(),
        );
        for i in 0..du.values.len() {
            let lin = al * du.values[i] + be * dv.values[i];
            prop_assert!((dm.values[i] - lin).abs() <= 1e-9 * (1.0 + lin.abs()));
        }
    }

    #[test]
    fn holder_zero_iff_constant(c in -3.0f64..3.0, bump in prop::option::of(0.01f64..1.0), x0 in -0.5f64..0.5) {
        let g = Grid::new(1.0, 2.0, 1.0 / 32.0).unwrap();
        let u = sample(|x| c + bump.map_or(0.0, |b| b * (x - x0)), g, TailModel::Zero).unwrap();
        let v = holder_seminorm(&u, 0.5, x0, 0.5, 0).unwrap();
        prop_assert_eq!(v == 0.0, bump.is_none());
    }

    #[test]
    fn tail_norm_homogeneous(c in -5.0f64..5.0, s in 0.05f64..0.95, amp in -2.0f64..2.0) {
        let g = Grid::new(1.0, 4.0, 1.0 / 16.0).unwrap();
        let u = sample(|x| (3.0 * x).cos() + 0.5, g, TailModel::power(amp, 1.5).unwrap()).unwrap();
        let a = tail_norm(&u.scaled(c), s).unwrap();
        let b = c.abs() * tail_norm(&u, s).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }
}
