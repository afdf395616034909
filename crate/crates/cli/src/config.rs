//! Plain-text experiment configs: one `key = value` pair per line, `#` starts
//! a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use deadcore::{ExteriorShape, ReactionMode};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    SolveLocal,
    Exponent,
    Blowup,
    Compare,
    Liouville,
    Slimit,
    Validate,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Solve,
        Mode::SolveLocal,
        Mode::Exponent,
        Mode::Blowup,
        Mode::Compare,
        Mode::Liouville,
        Mode::Slimit,
        Mode::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::SolveLocal => "solve-local",
            Mode::Exponent => "exponent",
            Mode::Blowup => "blowup",
            Mode::Compare => "compare",
            Mode::Liouville => "liouville",
            Mode::Slimit => "slimit",
            Mode::Validate => "validate",
        }
    }

    /// Modes that assemble the nonlocal operator.
    pub fn is_nonlocal(self) -> bool {
        !matches!(self, Mode::SolveLocal | Mode::Validate)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

/// Exterior data: zero or a builder shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Data {
    Zero,
    Shape(ExteriorShape),
}

impl fmt::Display for Data {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Data::Zero => f.write_str("zero"),
            Data::Shape(s) => s.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Value(f64),
    /// Calibrated so the center is a branching point.
    Critical,
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amplitude::Value(v) => write!(f, "{v}"),
            Amplitude::Critical => f.write_str("critical"),
        }
    }
}

/// Dirichlet values for the local problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Values(f64, f64),
    /// Values of the exact two-phase profile at `±a`.
    Profile,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Values(l, r) => write!(f, "{l},{r}"),
            Boundary::Profile => f.write_str("profile"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub s: f64,
    pub gamma: f64,
    pub a: f64,
    pub r: f64,
    pub h: f64,
    pub reaction: ReactionMode,
    pub data: Data,
    pub amplitude: Amplitude,
    pub boundary: Option<Boundary>,
    pub residual_tol: f64,
    pub max_iters: usize,
    pub eps: f64,
    pub x0: Option<f64>,
    pub tau: f64,
    pub s_list: Vec<f64>,
    pub radii: Option<Vec<f64>>,
    pub r_list: Vec<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub k: Option<usize>,
    pub pairs: usize,
    pub seed: u64,
    /// Line of each key in the source text, for error messages.
    pub lines: BTreeMap<String, usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Solve,
            s: 0.95,
            gamma: 0.2,
            a: 1.0,
            r: 8.0,
            h: 1.0 / 128.0,
            reaction: ReactionMode::TwoPhase,
            data: Data::Shape(ExteriorShape::Ramp),
            amplitude: Amplitude::Value(1.0),
            boundary: None,
            residual_tol: 1e-9,
            max_iters: 200,
            eps: 0.0,
            x0: None,
            tau: 1e-12,
            s_list: vec![0.9, 0.95, 0.99],
            radii: None,
            r_list: vec![0.5, 0.25, 0.125],
            r_min: None,
            r_max: None,
            k: None,
            pairs: 100,
            seed: 0,
            lines: BTreeMap::new(),
        }
    }
}

pub const KEYS: [&str; 23] = [
    "mode", "s", "gamma", "a", "R", "h", "reaction", "data", "amplitude", "boundary", "residual_tol", "max_iters",
    "eps", "x0", "tau", "s_list", "radii", "r_list", "r_min", "r_max", "k", "pairs", "seed",
];

/// Number with optional `p/q` or `b^e` forms, e.g. `1/512` or `2^-9`.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let v = if let Some((b, e)) = t.split_once('^') {
        let b: f64 = b.trim().parse().map_err(|_| format!("bad base in '{t}'"))?;
        let e: f64 = e.trim().parse().map_err(|_| format!("bad exponent in '{t}'"))?;
        b.powf(e)
    } else if let Some((p, q)) = t.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in '{t}'"))?;
        let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in '{t}'"))?;
        p / q
    } else {
        t.parse().map_err(|_| format!("'{t}' is not a number"))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{t}' is not finite"))
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let items: Result<Vec<f64>, String> = text.split(',').map(parse_number).collect();
    let items = items?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| CliError::config(line, format!("expected 'key = value', found '{body}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let canonical = KEYS
                .iter()
                .find(|c| c.eq_ignore_ascii_case(key))
                .ok_or_else(|| CliError::config(line, format!("unknown key '{key}'")))?;
            if cfg.lines.insert(canonical.to_string(), line).is_some() {
                return Err(CliError::config(line, format!("duplicate key '{key}'")));
            }
            cfg.set(canonical, value).map_err(|m| CliError::config(line, m))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let count = |v: &str| -> Result<usize, String> { v.parse().map_err(|_| format!("'{v}' is not a count")) };
        match key {
            "mode" => self.mode = value.parse()?,
            "s" => self.s = parse_number(value)?,
            "gamma" => self.gamma = parse_number(value)?,
            "a" => self.a = parse_number(value)?,
            "R" => self.r = parse_number(value)?,
            "h" => self.h = parse_number(value)?,
            "reaction" => self.reaction = value.parse().map_err(|e: deadcore::Error| e.to_string())?,
            "data" => {
                self.data = match value {
                    "zero" => Data::Zero,
                    other => Data::Shape(other.parse().map_err(|e: deadcore::Error| e.to_string())?),
                }
            }
            "amplitude" => {
                self.amplitude = match value {
                    "critical" => Amplitude::Critical,
                    other => Amplitude::Value(parse_number(other)?),
                }
            }
            "boundary" => {
                self.boundary = Some(match value {
                    "profile" => Boundary::Profile,
                    other => match parse_list(other)?.as_slice() {
                        &[l, r] => Boundary::Values(l, r),
                        _ => return Err("boundary takes two values 'left, right' or 'profile'".into()),
                    },
                })
            }
            "residual_tol" => self.residual_tol = parse_number(value)?,
            "max_iters" => self.max_iters = count(value)?,
            "eps" => self.eps = parse_number(value)?,
            "x0" => self.x0 = Some(parse_number(value)?),
            "tau" => self.tau = parse_number(value)?,
            "s_list" => self.s_list = parse_list(value)?,
            "radii" => self.radii = Some(parse_list(value)?),
            "r_list" => self.r_list = parse_list(value)?,
            "r_min" => self.r_min = Some(parse_number(value)?),
            "r_max" => self.r_max = Some(parse_number(value)?),
            "k" => self.k = Some(count(value)?),
            "pairs" => self.pairs = count(value)?,
            "seed" => self.seed = value.parse().map_err(|_| format!("'{value}' is not a 64-bit seed"))?,
            _ => unreachable!("key list and setter disagree on '{key}'"),
        }
        Ok(())
    }

    /// Line where `key` was set, if it came from the file.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.lines.get(key).copied()
    }

    /// Effective settings as `key=value` pairs, in a fixed order.
    pub fn summary(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let opt = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), |x| x.to_string());
        let out = vec![
            ("mode", self.mode.to_string()),
            ("s", self.s.to_string()),
            ("gamma", self.gamma.to_string()),
            ("a", self.a.to_string()),
            ("R", self.r.to_string()),
            ("h", self.h.to_string()),
            ("reaction", self.reaction.to_string()),
            ("data", self.data.to_string()),
            ("amplitude", self.amplitude.to_string()),
            ("boundary", self.boundary.map_or_else(|| "data".to_string(), |b| b.to_string())),
            ("residual_tol", self.residual_tol.to_string()),
            ("max_iters", self.max_iters.to_string()),
            ("eps", self.eps.to_string()),
            ("x0", opt(self.x0)),
            ("tau", self.tau.to_string()),
            ("s_list", list(&self.s_list)),
            ("radii", self.radii.as_deref().map_or_else(|| "auto".to_string(), list)),
            ("r_list", list(&self.r_list)),
            ("r_min", opt(self.r_min)),
            ("r_max", opt(self.r_max)),
            ("k", self.k.map_or_else(|| "auto".to_string(), |k| k.to_string())),
            ("pairs", self.pairs.to_string()),
            ("seed", self.seed.to_string()),
        ];
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}
