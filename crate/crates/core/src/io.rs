//! CSV and `key=value` serialization.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::analysis::{BranchingReport, ExponentFit, SLimitRow};
use crate::error::{Error, Result};
use crate::fraclap::FracLapOperator;
use crate::grid::{Grid, GridFunction, TailModel};
use crate::solver::SolveReport;

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `# tail=...` line, `x,u` header, one node per row.
pub fn write_grid_function<W: Write>(u: &GridFunction, mut out: W) -> Result<()> {
    writeln!(out, "# tail={}", u.tail)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "u"]).map_err(csv_err)?;
    for (x, v) in u.grid.nodes().iter().zip(&u.values) {
        w.write_record([fmt_f64(*x), fmt_f64(*v)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Reads a function written by [`write_grid_function`] back onto `grid`.
pub fn read_grid_function<R: BufRead>(grid: Arc<Grid>, mut input: R) -> Result<GridFunction> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let tail: TailModel = first
        .trim()
        .strip_prefix("# tail=")
        .ok_or_else(|| Error::Parse("missing '# tail=' line".into()))?
        .parse()?;
    let mut r = csv::Reader::from_reader(input);
    let mut values = Vec::with_capacity(grid.len());
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad row {}", k + 2)))
        };
        let x = parse(0)?;
        if k >= grid.len() || (x - grid.x(k)).abs() > 1e-9 * grid.h() {
            return Err(Error::GridMismatch);
        }
        values.push(parse(1)?);
    }
    GridFunction::new(grid, values, tail)
}

/// Debug dump `i,j,weight` of the interior matrix, row-major.
pub fn write_operator<W: Write>(op: &FracLapOperator, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "weight"]).map_err(csv_err)?;
    let n = op.n();
    for i in 0..n {
        for j in 0..n {
            w.write_record([i.to_string(), j.to_string(), fmt_f64(op.a.at(i, j))])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Plain `key=value` lines in the given order.
pub fn write_metadata<W: Write>(pairs: &[(String, String)], mut out: W) -> Result<()> {
    for (k, v) in pairs {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}

/// Standard metadata for a solve report.
pub fn report_metadata(rep: &SolveReport) -> Vec<(String, String)> {
    let s = rep.s.map_or("1".to_string(), fmt_f64);
    vec![
        ("s".into(), s),
        ("gamma".into(), fmt_f64(rep.spec.gamma)),
        ("mode".into(), rep.spec.mode.to_string()),
        ("residual".into(), fmt_f64(rep.residual_inf)),
        ("iterations".into(), rep.iterations.to_string()),
        ("energy".into(), fmt_f64(rep.energy)),
        ("converged".into(), rep.converged.to_string()),
        ("threads".into(), rep.threads.to_string()),
    ]
}

/// `s,gamma,x0,slope,target,relative_gap,r2`.
pub fn write_fits<W: Write>(rows: &[(f64, f64, &ExponentFit)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "gamma", "x0", "slope", "target", "relative_gap", "r2"])
        .map_err(csv_err)?;
    for (s, gamma, fit) in rows {
        let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), fmt_f64);
        w.write_record([
            fmt_f64(*s),
            fmt_f64(*gamma),
            fmt_f64(fit.x0),
            fmt_f64(fit.slope),
            opt(fit.target),
            opt(fit.relative_gap),
            fmt_f64(fit.r_squared),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `x0,u,du,d2u`.
pub fn write_branching<W: Write>(rep: &BranchingReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x0", "u", "du", "d2u"]).map_err(csv_err)?;
    for c in &rep.candidates {
        w.write_record([fmt_f64(c.x0), fmt_f64(c.u), fmt_f64(c.du), fmt_f64(c.d2u)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `s,distance,slope`.
pub fn write_study<W: Write>(rows: &[SLimitRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "distance", "slope"]).map_err(csv_err)?;
    for r in rows {
        let slope = r.slope.map_or_else(|| "nan".to_string(), fmt_f64);
        w.write_record([fmt_f64(r.s), fmt_f64(r.distance), slope]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Renders `key=value` pairs to a string.
pub fn metadata_string(pairs: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}
