//! Closed-form local profile, exponent bookkeeping and exterior-data builders.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{sample, Grid, GridFunction, TailModel};

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 / 3.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            reason: "must lie in (0, 1/3)",
        })
    }
}

/// `u*(x) = κ (x₊^β - x₋^β)` with `β = 2/(1-γ)` and `κ = (β(β-1))^{-1/(1-γ)}`,
/// an exact solution of `u'' = u₊^γ - u₋^γ` on the whole line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalProfile {
    pub gamma: f64,
    pub beta: f64,
    pub kappa: f64,
}

pub fn exact_local_profile(gamma: f64) -> Result<LocalProfile> {
    check_gamma(gamma)?;
    let beta = 2.0 / (1.0 - gamma);
    let kappa = (beta * (beta - 1.0)).powf(-1.0 / (1.0 - gamma));
    Ok(LocalProfile { gamma, beta, kappa })
}

impl LocalProfile {
    pub fn eval(&self, x: f64) -> f64 {
        self.kappa * x.abs().powf(self.beta).copysign(x)
    }

    /// Exact derivative of order 0, 1 or 2.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        let (k, b) = (self.kappa, self.beta);
        match order {
            0 => self.eval(x),
            1 => k * b * x.abs().powf(b - 1.0),
            2 => (k * b * (b - 1.0) * x.abs().powf(b - 2.0)).copysign(x),
            _ => f64::NAN,
        }
    }

    /// Samples the profile on every node with a zero tail.
    pub fn sample(&self, grid: Arc<Grid>) -> Result<GridFunction> {
        sample(|x| self.eval(x), grid, TailModel::Zero)
    }
}

/// Regime of the branching-point definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nu {
    One,
    Two,
    Indeterminate,
}

impl std::fmt::Display for Nu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Nu::One => "1",
            Nu::Two => "2",
            Nu::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentTable {
    pub s: f64,
    pub gamma: f64,
    /// `2s/(1-γ)`.
    pub target: f64,
    pub gradient_target: f64,
    /// `2s + γ`.
    pub schauder: f64,
    pub nu: Nu,
}

pub fn exponent_table(s: f64, gamma: f64) -> Result<ExponentTable> {
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            reason: "must lie in (1/2, 1)",
        });
    }
    check_gamma(gamma)?;
    let target = 2.0 * s / (1.0 - gamma);
    let nu = if s < 1.0 - gamma {
        Nu::One
    } else if s > 1.0 - gamma / 2.0 {
        Nu::Two
    } else {
        Nu::Indeterminate
    };
    Ok(ExponentTable {
        s,
        gamma,
        target,
        gradient_target: target - 1.0,
        schauder: 2.0 * s + gamma,
        nu,
    })
}

/// Exterior data shapes, anchored at the interior edge `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExteriorShape {
    /// `sign(y) min(1, |y| - a)²`.
    Ramp,
    /// `sign(y)`.
    Plateau,
    /// `min(1, y - a)²` for `y > a`, zero for `y < -a`.
    RightRamp,
}

impl std::str::FromStr for ExteriorShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ramp" => Ok(ExteriorShape::Ramp),
            "plateau" => Ok(ExteriorShape::Plateau),
            "right-ramp" => Ok(ExteriorShape::RightRamp),
            other => Err(Error::Parse(format!("unknown data shape '{other}'"))),
        }
    }
}

impl std::fmt::Display for ExteriorShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExteriorShape::Ramp => "ramp",
            ExteriorShape::Plateau => "plateau",
            ExteriorShape::RightRamp => "right-ramp",
        })
    }
}

/// Exterior data `amplitude * shape(y)`; interior values are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorData {
    pub shape: ExteriorShape,
    pub amplitude: f64,
}

impl ExteriorData {
    pub fn new(shape: ExteriorShape, amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::OutOfRange {
                name: "amplitude",
                value: amplitude,
                reason: "must be finite and non-negative",
            });
        }
        Ok(ExteriorData { shape, amplitude })
    }

    pub fn is_odd(&self) -> bool {
        matches!(self.shape, ExteriorShape::Ramp | ExteriorShape::Plateau)
    }

    /// Value at `y` for interior half-width `a` (zero for `|y| <= a`).
    pub fn eval(&self, y: f64, a: f64) -> f64 {
        let d = y.abs() - a;
        if d <= 0.0 || self.amplitude == 0.0 {
            return 0.0;
        }
        let ramp = d.min(1.0).powi(2);
        let v = match self.shape {
            ExteriorShape::Ramp => ramp.copysign(y),
            ExteriorShape::Plateau => 1.0f64.copysign(y),
            ExteriorShape::RightRamp if y > 0.0 => ramp,
            ExteriorShape::RightRamp => 0.0,
        };
        self.amplitude * v
    }

    /// Limits at `∓a` from outside, used as local boundary values.
    pub fn edge_values(&self) -> (f64, f64) {
        match self.shape {
            ExteriorShape::Plateau => (-self.amplitude, self.amplitude),
            ExteriorShape::Ramp | ExteriorShape::RightRamp => (0.0, 0.0),
        }
    }

    /// Tail beyond `R`; the ramps are constant there once `R >= a + 1`.
    pub fn tail(&self, grid: &Grid) -> Result<TailModel> {
        let (a, r) = (grid.spec.a, grid.spec.r);
        if self.shape != ExteriorShape::Plateau && r < a + 1.0 {
            return Err(Error::InvalidGrid(format!(
                "ramp data need R >= a + 1 (R = {r}, a = {a})"
            )));
        }
        let amp = self.amplitude;
        if amp == 0.0 {
            return Ok(TailModel::Zero);
        }
        Ok(match self.shape {
            ExteriorShape::Ramp | ExteriorShape::Plateau => TailModel::odd_constant(amp),
            ExteriorShape::RightRamp => TailModel::Constant { left: 0.0, right: amp },
        })
    }

    pub fn sample(&self, grid: Arc<Grid>) -> Result<GridFunction> {
        let tail = self.tail(&grid)?;
        let a = grid.spec.a;
        sample(|y| self.eval(y, a), grid, tail)
    }
}

/// Builder for odd exterior data (`ramp` or `plateau`).
pub fn odd_exterior_builder(shape: ExteriorShape, amplitude: f64) -> Result<ExteriorData> {
    let data = ExteriorData::new(shape, amplitude)?;
    if !data.is_odd() {
        return Err(Error::Parse(format!("shape '{shape}' is not odd")));
    }
    Ok(data)
}
