use crate::error::{Error, Result};
use crate::grid::{GridFunction, TailModel};

const COINCIDE: f64 = 1e-9;

fn check(u: &GridFunction, x0: f64, r: f64, s: f64, gamma: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::OutOfRange { name: "r", value: r, reason: "must lie in (0, 1]" });
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::OutOfRange { name: "s", value: s, reason: "must lie in (0, 1]" });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange { name: "gamma", value: gamma, reason: "must lie in (0, 1)" });
    }
    let big_r = u.grid.spec.r;
    let (lo, hi) = (x0 - r * big_r, x0 + r * big_r);
    let slack = 1e-9 * u.grid.h();
    if lo < -big_r - slack || hi > big_r + slack {
        return Err(Error::BallOutsideGrid { lo, hi });
    }
    Ok(())
}

/// `v_r(x) = u(x0 + r x) / r^{2s/(1-γ)}` on the same grid, by linear
/// interpolation (exact where `x0 + r x` is a node). The tail is dropped.
pub fn blow_up(u: &GridFunction, x0: f64, r: f64, s: f64, gamma: f64) -> Result<GridFunction> {
    check(u, x0, r, s, gamma)?;
    let grid = &u.grid;
    let (h, big_r) = (grid.h(), grid.spec.r);
    let scale = r.powf(-2.0 * s / (1.0 - gamma));
    let last = grid.len() - 1;
    let values = grid
        .nodes()
        .iter()
        .map(|&x| {
            let p = ((x0 + r * x + big_r) / h).clamp(0.0, last as f64);
            let k = p.round();
            let v = if (p - k).abs() < COINCIDE {
                u.values[k as usize]
            } else {
                let j = (p.floor() as usize).min(last - 1);
                let t = p - j as f64;
                (1.0 - t) * u.values[j] + t * u.values[j + 1]
            };
            scale * v
        })
        .collect();
    GridFunction::new(grid.clone(), values, TailModel::Zero)
}

/// Nodes `x` whose preimage `x0 + r x` is itself a node.
pub fn coincident_nodes(u: &GridFunction, x0: f64, r: f64) -> Vec<usize> {
    let grid = &u.grid;
    let (h, big_r) = (grid.h(), grid.spec.r);
    (0..grid.len())
        .filter(|&i| {
            let p = (x0 + r * grid.x(i) + big_r) / h;
            (p - p.round()).abs() < COINCIDE
        })
        .collect()
}
