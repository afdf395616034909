use std::f64::consts::PI;
use std::sync::Arc;

use deadcore::fraclap::apply;
use deadcore::grid::tail_norm;
use deadcore::linalg::SpdSystem;
use deadcore::{assemble, normalization_constant, sample, Error, Grid, QuadratureConfig, TailModel};
use proptest::prelude::*;

/// `Γ` by the reflection-free Stirling series with upward recurrence,
/// independent of the library's Lanczos routine.
fn gamma_ref(x: f64) -> f64 {
    let mut shift = 1.0;
    let mut z = x;
    while z < 20.0 {
        shift *= z;
        z += 1.0;
    }
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z.powi(3)) + 1.0 / (1260.0 * z.powi(5))
        - 1.0 / (1680.0 * z.powi(7));
    ((z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series).exp() / shift
}

#[test]
fn normalization_values() {
    assert!((normalization_constant(1, 0.5).unwrap() - 1.0 / PI).abs() < 1e-15);
    // Frozen 30-digit references.
    for (s, want) in [
        (0.6, 0.333549429912248113855925701713),
        (0.75, 0.299206710301074508454959544951),
        (0.95, 0.0909924824751944964915760066069),
        (0.99, 0.0196325966875817824210428925551),
    ] {
        let c = normalization_constant(1, s).unwrap();
        assert!((c - want).abs() < 1e-13 * want, "{s}: {c}");
        let indep = 4f64.powf(s) * gamma_ref(0.5 + s) * s / (PI.sqrt() * gamma_ref(1.0 - s));
        assert!((c - indep).abs() < 1e-12 * want);
    }
    assert!(matches!(normalization_constant(1, 0.999), Err(Error::OutOfRange { .. })));
    assert!(normalization_constant(1, 0.0).is_err());
    // c_{1,s} vanishes linearly as s -> 1.
    let r1 = normalization_constant(1, 0.99).unwrap() / 0.01;
    let r2 = normalization_constant(1, 0.998).unwrap() / 0.002;
    assert!((r1 - r2).abs() < 0.02 * r2);
}

#[test]
fn assembly_rejects_out_of_range() {
    let g = Grid::new(1.0, 4.0, 0.125).unwrap();
    for s in [0.49, 0.3, 0.999, 1.0] {
        assert!(assemble(g.clone(), s, QuadratureConfig::default()).is_err());
    }
}

fn grid(h: f64, r: f64) -> Arc<Grid> {
    Grid::new(1.0, r, h).unwrap()
}

#[test]
fn constants_annihilated() {
    for s in [0.55, 0.75, 0.95, 0.99] {
        let g = grid(1.0 / 64.0, 4.0);
        let op = assemble(g.clone(), s, QuadratureConfig::default()).unwrap();
        let one = sample(|_| 1.0, g, TailModel::constant(1.0)).unwrap();
        let out = apply(&op, &one).unwrap();
        let scale = op.diagonal();
        for v in out.values {
            assert!(v.abs() < 1e-12 * scale, "s = {s}: {v}");
        }
    }
}

#[test]
fn monotone_structure() {
    let g = grid(1.0 / 32.0, 4.0);
    let op = assemble(g.clone(), 0.8, QuadratureConfig::default()).unwrap();
    let n = op.n();
    for i in 0..n {
        for j in 0..n {
            assert_eq!(op.a.at(i, j), op.a.at(j, i));
            if i != j {
                assert!(op.a.at(i, j) < 0.0);
            }
        }
        let gi = g.interior().start + i;
        let ext: f64 = g.exterior().map(|j| op.weight(gi, j)).sum();
        assert!(g.exterior().all(|j| op.weight(gi, j) > 0.0));
        // Row plus exterior weights plus the constant-tail mass balance to zero.
        let row: f64 = op.a.row(i).iter().sum();
        let tail = op.c * op.tail_integral(&TailModel::constant(1.0), g.x(gi));
        assert!((row - ext - tail).abs() < 1e-12 * op.diagonal());
    }
}

/// (−Δ)^s (1 − x²)₊^s = 4^s Γ(1/2 + s) Γ(1 + s) / √π on (−1, 1); equals 1 at s = 1/2.
fn getoor_constant(s: f64) -> f64 {
    4f64.powf(s) * gamma_ref(0.5 + s) * gamma_ref(1.0 + s) / PI.sqrt()
}

fn getoor_sup_error(s: f64, h: f64, radius: f64) -> f64 {
    let g = grid(h, 8.0);
    let op = assemble(g.clone(), s, QuadratureConfig::default()).unwrap();
    let u = sample(|x| (1.0 - x * x).max(0.0).powf(s), g.clone(), TailModel::Zero).unwrap();
    let out = apply(&op, &u).unwrap();
    let want = getoor_constant(s);
    g.interior()
        .filter(|&i| g.x(i).abs() <= radius)
        .map(|i| (out.at(i).unwrap() - want).abs())
        .fold(0.0, f64::max)
}

#[test]
fn getoor_pair_on_compact_subsets() {
    for s in [0.5, 0.75] {
        let e1 = getoor_sup_error(s, 1.0 / 128.0, 0.5);
        let e2 = getoor_sup_error(s, 1.0 / 256.0, 0.5);
        assert!(e2 < 5e-3, "s = {s}: {e2}");
        assert!(e1 / e2 > 1.8, "s = {s}: {e1} -> {e2}");
    }
}

/// Kummer series ₁F₁(a; b; z).
fn hyp1f1(a: f64, b: f64, z: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 0..500 {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// (−Δ)^s e^{−x²} = 4^s Γ(1/2 + s)/√π ₁F₁(1/2 + s; 1/2; −x²), from the
/// Fourier symbol |ξ|^{2s}.
fn gaussian_error(s: f64, h: f64) -> f64 {
    let g = grid(h, 8.0);
    let op = assemble(g.clone(), s, QuadratureConfig::default()).unwrap();
    let u = sample(|x| (-x * x).exp(), g.clone(), TailModel::Zero).unwrap();
    let out = apply(&op, &u).unwrap();
    let k = 4f64.powf(s) * gamma_ref(0.5 + s) / PI.sqrt();
    [0.0, 0.25, 0.5, 0.75]
        .iter()
        .map(|&x| {
            let i = g.node_at(x).unwrap();
            (out.at(i).unwrap() - k * hyp1f1(0.5 + s, 0.5, -x * x)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn consistency_order_on_smooth_data() {
    for s in [0.5, 0.6, 0.75, 0.95] {
        let e1 = gaussian_error(s, 1.0 / 32.0);
        let e2 = gaussian_error(s, 1.0 / 64.0);
        let factor = 2f64.powf(3.0 - 2.0 * s - 0.2);
        assert!(e1 / e2 >= factor, "s = {s}: {e1:e} -> {e2:e}, need {factor}");
        assert!(e2 < 1e-3);
    }
}

#[test]
fn antisymmetry_with_odd_power_tail() {
    let g = grid(1.0 / 32.0, 4.0);
    let op = assemble(g.clone(), 0.7, QuadratureConfig::default()).unwrap();
    // u(x) = x on [-R, R], continued by ±R (|y|/R)^{-p} beyond.
    let p = 0.5;
    let c = 4f64.powf(1.0 + p);
    let tail = TailModel::power_sided(-c, c, p).unwrap();
    let u = sample(|x| x, g.clone(), tail).unwrap();
    let out = apply(&op, &u).unwrap();
    let scale = op.diagonal();
    for i in g.interior() {
        let j = g.len() - 1 - i;
        assert!((out.at(i).unwrap() + out.at(j).unwrap()).abs() < 1e-12 * scale);
    }
}

#[test]
fn load_matches_direct_quadrature_of_tail() {
    // The far-field term of b(g) for a power tail against a brute-force
    // integral of c (−tail(y)) |x − y|^{−1−2s} over y > R (substitution y = R/t).
    let g = grid(1.0 / 16.0, 4.0);
    let s = 0.85;
    let op = assemble(g.clone(), s, QuadratureConfig::default()).unwrap();
    let tail = TailModel::power_sided(0.0, 2.0, 1.3).unwrap();
    let data = sample(|_| 0.0, g.clone(), tail).unwrap();
    let b = op.load(&data).unwrap();
    let n = 400_000;
    for (k, i) in g.interior().enumerate().step_by(5) {
        let x = g.x(i);
        let mut acc = 0.0;
        for m in 0..n {
            let t = (m as f64 + 0.5) / n as f64;
            let y = 4.0 / t;
            acc += 2.0 * y.powf(-1.3) * (y - x).powf(-1.0 - 2.0 * s) * 4.0 / (t * t);
        }
        let want = -op.c * acc / n as f64;
        assert!((b[k] - want).abs() < 1e-8 * want.abs(), "{x}: {} vs {want}", b[k]);
    }
}

#[test]
fn truncation_control() {
    // Doubling R with a power tail p = 1 + 2s changes the operator on B_1 by
    // less than c K ∫_{|y|>R} (|u| + |tail|)/(1 + |y|^{1+2s}) dy, where
    // K = (1 + R^{1+2s})/(R − 1)^{1+2s} bounds the kernel ratio for |x| ≤ 1.
    let s = 0.75;
    let sigma = 1.0 + 2.0 * s;
    let p = sigma;
    let f = |x: f64| (1.0 + x * x).powf(-p / 2.0);
    let tail = TailModel::power(1.0, p).unwrap();
    let h = 1.0 / 32.0;
    let (g8, g16) = (grid(h, 8.0), grid(h, 16.0));
    let u8 = sample(f, g8.clone(), tail).unwrap();
    let u16 = sample(f, g16.clone(), tail).unwrap();
    let o8 = apply(&assemble(g8.clone(), s, QuadratureConfig::default()).unwrap(), &u8).unwrap();
    let op16 = assemble(g16.clone(), s, QuadratureConfig::default()).unwrap();
    let o16 = apply(&op16, &u16).unwrap();
    let change = o8
        .values
        .iter()
        .zip(&o16.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let big_r = 8.0;
    let mut bare = u8.clone();
    bare.tail = TailModel::Zero;
    let far = tail_norm(&u8, s).unwrap() - tail_norm(&bare, s).unwrap();
    let k = (1.0 + f64::powf(big_r, sigma)) / (big_r - 1.0f64).powf(sigma);
    let bound = op16.c * k * 2.0 * far;
    assert!(change < bound, "{change:e} vs {bound:e}");
    assert!(change > 0.0);
}

fn smooth(c: &[f64], x: f64) -> f64 {
    c[0] + c[1] * x.sin() + c[2] * (2.0 * x).cos() + c[3] * x * x
}

fn random_vec(seed: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let k = i as f64;
            seed.iter().enumerate().map(|(m, a)| a * ((m as f64 + 1.0) * 0.37 * k + m as f64).sin()).sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn symmetric_and_positive(seed in prop::collection::vec(-1.0f64..1.0, 6),
                              seed2 in prop::collection::vec(-1.0f64..1.0, 6),
                              s in 0.5f64..0.99) {
        let g = grid(1.0 / 16.0, 2.0);
        let op = assemble(g, s, QuadratureConfig::default()).unwrap();
        let n = op.n();
        let (u, v) = (random_vec(&seed, n), random_vec(&seed2, n));
        let (mut au, mut av) = (vec![0.0; n], vec![0.0; n]);
        op.a.matvec(&u, &mut au);
        op.a.matvec(&v, &mut av);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (l, r) = (dot(&au, &v), dot(&u, &av));
        prop_assert!((l - r).abs() <= 1e-12 * (l.abs().max(r.abs()) + op.diagonal() * 1e-3));
        prop_assert!(dot(&au, &u) >= -1e-12 * dot(&u, &u));
    }

    #[test]
    fn linear(a in prop::collection::vec(-1.0f64..1.0, 4), b in prop::collection::vec(-1.0f64..1.0, 4),
              ta in -1.0f64..1.0, tb in -1.0f64..1.0) {
        let g = grid(1.0 / 16.0, 3.0);
        let op = assemble(g.clone(), 0.9, QuadratureConfig::default()).unwrap();
        let u = sample(|x| smooth(&a, x), g.clone(), TailModel::constant(ta)).unwrap();
        let v = sample(|x| smooth(&b, x), g.clone(), TailModel::constant(tb)).unwrap();
        let sum = deadcore::GridFunction::new(
            g.clone(),
            u.values.iter().zip(&v.values).map(|(x, y)| x + y).collect(),
            TailModel::constant(ta + tb),
        ).unwrap();
        let (ou, ov, os) = (apply(&op, &u).unwrap(), apply(&op, &v).unwrap(), apply(&op, &sum).unwrap());
        for i in 0..os.values.len() {
            let lin = ou.values[i] + ov.values[i];
            prop_assert!((os.values[i] - lin).abs() <= 1e-11 * op.diagonal());
        }
    }
}
