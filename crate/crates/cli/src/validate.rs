use std::fmt;

use deadcore::{exponent_table, ExponentTable, GridSpec, Nu};

use crate::config::{Amplitude, Data, ExperimentConfig, Mode};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Ok,
    Warning,
    Error,
}

/// Outcome of a parameter check with a machine-readable code.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub level: Level,
    pub code: &'static str,
    pub message: String,
    pub table: Option<ExponentTable>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.level {
            Level::Ok => "ok",
            Level::Warning => "warning",
            Level::Error => "error",
        };
        write!(f, "status={status} code={} message=\"{}\"", self.code, self.message)?;
        if let Some(t) = &self.table {
            write!(
                f,
                " s={} gamma={} nu={} target={} gradient_target={} schauder={}",
                t.s, t.gamma, t.nu, t.target, t.gradient_target, t.schauder
            )?;
        }
        Ok(())
    }
}

/// Checks `γ ∈ (0, 1/3)` and `s ∈ (1/2, 1)` and reports the `ν` regime.
pub fn validate_params(s: f64, gamma: f64) -> Diagnostic {
    let error = |code, message: String| Diagnostic { level: Level::Error, code, message, table: None };
    if !(gamma > 0.0 && gamma < 1.0 / 3.0) {
        return error("E_GAMMA_RANGE", format!("gamma = {gamma} is outside (0, 1/3)"));
    }
    if !(s > 0.5 && s < 1.0) {
        return error("E_S_RANGE", format!("s = {s} is outside (1/2, 1)"));
    }
    let table = exponent_table(s, gamma).expect("ranges checked above");
    match table.nu {
        Nu::Indeterminate => Diagnostic {
            level: Level::Warning,
            code: "W_NU_INDETERMINATE",
            message: format!(
                "s = {s} lies in [1 - gamma, 1 - gamma/2] = [{}, {}]; nu is not determined",
                1.0 - gamma,
                1.0 - gamma / 2.0
            ),
            table: Some(table),
        },
        nu => Diagnostic {
            level: Level::Ok,
            code: "OK",
            message: format!("nu = {nu}"),
            table: Some(table),
        },
    }
}

fn at(cfg: &ExperimentConfig, key: &str, message: String) -> CliError {
    match cfg.line_of(key) {
        Some(line) => CliError::config(line, message),
        None => CliError::Validation(message),
    }
}

/// Full config validation. Returns warnings; errors name the offending line.
pub fn validate_config(cfg: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    let mut warnings = Vec::new();
    let spec = GridSpec::new(cfg.a, cfg.r, cfg.h).map_err(|e| at(cfg, "h", e.to_string()))?;
    if let Some(w) = spec.warnings().into_iter().next() {
        return Err(at(cfg, "h", w));
    }
    if !(cfg.gamma > 0.0 && cfg.gamma < 1.0 / 3.0) {
        let d = validate_params(cfg.s, cfg.gamma);
        return Err(at(cfg, "gamma", format!("{}: {}", d.code, d.message)));
    }
    let s_values: Vec<f64> = match cfg.mode {
        Mode::Slimit => cfg.s_list.clone(),
        Mode::SolveLocal => Vec::new(),
        _ => vec![cfg.s],
    };
    for s in s_values {
        let d = validate_params(s, cfg.gamma);
        let key = if cfg.mode == Mode::Slimit { "s_list" } else { "s" };
        match d.level {
            Level::Error => return Err(at(cfg, key, format!("{}: {}", d.code, d.message))),
            Level::Warning => warnings.push(format!("{}: {}", d.code, d.message)),
            Level::Ok => {}
        }
    }
    if !(cfg.residual_tol >= 1e-12) {
        return Err(at(cfg, "residual_tol", "residual_tol must be at least 1e-12".into()));
    }
    if cfg.max_iters < 1 {
        return Err(at(cfg, "max_iters", "max_iters must be at least 1".into()));
    }
    if !(0.0..=1e-6).contains(&cfg.eps) {
        return Err(at(cfg, "eps", "eps must lie in [0, 1e-6]".into()));
    }
    if !(cfg.tau > 0.0) {
        return Err(at(cfg, "tau", "tau must be positive".into()));
    }
    if let Amplitude::Value(v) = cfg.amplitude {
        if v < 0.0 {
            return Err(at(cfg, "amplitude", "amplitude must be non-negative".into()));
        }
    }
    let odd = matches!(cfg.data, Data::Shape(s) if s != deadcore::ExteriorShape::RightRamp);
    if cfg.amplitude == Amplitude::Critical && !odd {
        return Err(at(cfg, "amplitude", "amplitude = critical needs odd data (ramp or plateau)".into()));
    }
    if cfg.r_list.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(at(cfg, "r_list", "blow-up radii must lie in (0, 1]".into()));
    }
    if let Some(radii) = &cfg.radii {
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|&r| r <= 0.0 || r > cfg.r) {
            return Err(at(cfg, "radii", "radii must be increasing and within (0, R]".into()));
        }
    }
    if cfg.mode == Mode::Compare && cfg.pairs == 0 {
        return Err(at(cfg, "pairs", "pairs must be at least 1".into()));
    }
    if let Some(x0) = cfg.x0 {
        if x0.abs() >= cfg.a {
            return Err(at(cfg, "x0", format!("x0 = {x0} must lie inside (-a, a)")));
        }
    }
    Ok(warnings)
}
