use crate::error::{Error, Result};
use crate::grid::{discrete_derivative, sup_on_ball, GridFunction};

/// Least-squares line through `(log r_j, log sup_{B_{r_j}(x0)} |D^k u|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub x0: f64,
    pub order: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub radii: Vec<f64>,
    pub sups: Vec<f64>,
    pub target: Option<f64>,
    pub relative_gap: Option<f64>,
}

impl ExponentFit {
    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self.relative_gap = Some((self.slope - target).abs() / target);
        self
    }

    /// Fitted constant `e^intercept`.
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Window `[8h, a/4]` with 8 radii.
pub fn default_window(h: f64, a: f64) -> (f64, f64, usize) {
    (8.0 * h, a / 4.0, 8)
}

/// `k` geometric radii in `[r_min, r_max]` rounded to multiples of `h`
/// (duplicates dropped), so that balls about a node end on nodes.
pub fn geometric_radii(r_min: f64, r_max: f64, k: usize, h: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(k);
    for j in 0..k {
        let t = j as f64 / (k - 1) as f64;
        let r = r_min * (r_max / r_min).powf(t);
        let snapped = (r / h).round() * h;
        if out.last().is_none_or(|&last| snapped > last) {
            out.push(snapped);
        }
    }
    out
}

pub fn fit_growth_exponent(
    u: &GridFunction,
    x0: f64,
    r_min: f64,
    r_max: f64,
    k: usize,
    order: usize,
) -> Result<ExponentFit> {
    let h = u.grid.h();
    if r_min < 4.0 * h * (1.0 - 1e-12) {
        return Err(Error::BadWindow(format!("r_min = {r_min} is below 4h = {}", 4.0 * h)));
    }
    if k < 4 {
        return Err(Error::BadWindow(format!("k = {k} radii, at least 4 required")));
    }
    if !(r_max > r_min) {
        return Err(Error::BadWindow(format!("r_max = {r_max} must exceed r_min = {r_min}")));
    }
    let radii = geometric_radii(r_min, r_max, k, h);
    if radii.len() < 4 {
        return Err(Error::BadWindow("fewer than 4 distinct radii after snapping".into()));
    }
    fit_growth_exponent_with_radii(u, x0, &radii, order)
}

/// Fit over explicit radii (strictly increasing, each at least `2h`).
pub fn fit_growth_exponent_with_radii(u: &GridFunction, x0: f64, radii: &[f64], order: usize) -> Result<ExponentFit> {
    let h = u.grid.h();
    if radii.len() < 2 {
        return Err(Error::BadWindow("at least 2 radii required".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadWindow("radii must be strictly increasing".into()));
    }
    if radii[0] < 2.0 * h * (1.0 - 1e-12) {
        return Err(Error::BadWindow(format!("radius {} is below 2h", radii[0])));
    }
    let field = match order {
        0 => u.clone(),
        1 => discrete_derivative(u, 1)?,
        k => return Err(Error::BadOrder(k)),
    };
    let mut sups = Vec::with_capacity(radii.len());
    for &r in radii {
        let v = sup_on_ball(&field, x0, r)?;
        if !(v > 0.0) {
            return Err(Error::FlatFunction(r));
        }
        sups.push(v);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = sups.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(ExponentFit {
        x0,
        order,
        slope,
        intercept,
        r_squared,
        radii: radii.to_vec(),
        sups,
        target: None,
        relative_gap: None,
    })
}
