use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use deadcore::analysis::{
    blow_up, comparison_campaign, critical_amplitude, default_window, detect_branching, detect_dead_core,
    fit_growth_exponent, liouville_probe, one_phase_branching_check, s_limit_study, CalibrationConfig, ExponentFit,
    NuMode, SLimitOptions, Tolerances,
};
use deadcore::grid::sup_on_ball;
use deadcore::io::{fmt_f64, report_metadata, write_branching, write_fits, write_grid_function, write_metadata, write_study};
use deadcore::{
    assemble, exact_local_profile, exponent_table, solve, solve_local, ExteriorData, ExteriorShape, FracLapOperator,
    Grid, GridFunction, Nu, QuadratureConfig, ReactionSpec, SolveReport, SolverConfig,
};

use crate::config::{Amplitude, Boundary, Data, ExperimentConfig, Mode};
use crate::validate::{validate_config, validate_params, Level};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub dry_run: bool,
}

/// Files written and lines printed by one run.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: &'a Path,
    summary: RunSummary,
    meta: Vec<(String, String)>,
}

impl Ctx<'_> {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.out.join(name);
        self.summary.files.push(path.clone());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    fn write_solution(&mut self, name: &str, rep: &SolveReport) -> Result<(), CliError> {
        let mut w = self.create(&format!("{name}.csv"))?;
        write_grid_function(&rep.u, &mut w)?;
        w.flush()?;
        let trace_name = format!("{name}_trace.csv");
        let mut t = self.create(&trace_name)?;
        writeln!(t, "iteration,residual,energy,step")?;
        for (k, r) in rep.trace.iter().enumerate() {
            writeln!(t, "{k},{},{},{}", fmt_f64(r.residual), fmt_f64(r.energy), fmt_f64(r.step))?;
        }
        t.flush()?;
        let skip = ["s", "gamma", "mode"];
        self.meta.extend(report_metadata(rep).into_iter().filter(|(k, _)| !skip.contains(&k.as_str())));
        Ok(())
    }

    fn finish(mut self) -> Result<RunSummary, CliError> {
        let mut pairs = self.cfg.summary();
        pairs.append(&mut self.meta);
        let mut w = self.create("run.meta")?;
        write_metadata(&pairs, &mut w)?;
        w.flush()?;
        Ok(self.summary)
    }
}

fn grid(cfg: &ExperimentConfig) -> Result<Arc<Grid>, CliError> {
    Ok(Grid::new(cfg.a, cfg.r, cfg.h)?)
}

fn reaction(cfg: &ExperimentConfig) -> Result<ReactionSpec, CliError> {
    Ok(ReactionSpec::with_eps(cfg.gamma, cfg.reaction, cfg.eps)?)
}

fn solver_config(cfg: &ExperimentConfig) -> Result<SolverConfig, CliError> {
    Ok(SolverConfig { residual_tol: cfg.residual_tol, max_iters: cfg.max_iters, ..Default::default() })
}

fn shape_data(cfg: &ExperimentConfig, amplitude: f64) -> Result<ExteriorData, CliError> {
    let shape = match cfg.data {
        Data::Zero => return Ok(ExteriorData::new(ExteriorShape::Ramp, 0.0)?),
        Data::Shape(s) => s,
    };
    Ok(ExteriorData::new(shape, amplitude)?)
}

fn check(rep: SolveReport) -> Result<SolveReport, CliError> {
    Ok(rep.require_converged()?)
}

/// Nonlocal solve with the configured data; `amplitude = critical` calibrates
/// first. Returns the report and the amplitude used.
fn nonlocal_solve(ctx: &mut Ctx, op: &FracLapOperator) -> Result<(SolveReport, f64), CliError> {
    let cfg = ctx.cfg;
    let spec = reaction(cfg)?;
    let scfg = solver_config(cfg)?;
    match cfg.amplitude {
        Amplitude::Value(v) => {
            let g = shape_data(cfg, v)?.sample(op.grid.clone())?;
            let used = if cfg.data == Data::Zero { 0.0 } else { v };
            Ok((solve(op, &g, &spec, &scfg)?, used))
        }
        Amplitude::Critical => {
            let Data::Shape(shape) = cfg.data else {
                return Err(CliError::Validation("amplitude = critical needs odd data".into()));
            };
            let cal = CalibrationConfig { x0: cfg.x0.unwrap_or(0.0), ..Default::default() };
            let found = critical_amplitude(op, shape, &spec, &scfg, &cal)?;
            ctx.note("critical_amplitude", fmt_f64(found.amplitude));
            ctx.note("critical_bracket_hi", fmt_f64(found.bracket.1));
            ctx.note("calibration_solves", found.solves);
            Ok((found.report, found.amplitude))
        }
    }
}

fn window(cfg: &ExperimentConfig) -> (f64, f64, usize) {
    let (r0, r1, k) = default_window(cfg.h, cfg.a);
    (cfg.r_min.unwrap_or(r0), cfg.r_max.unwrap_or(r1), cfg.k.unwrap_or(k))
}

fn nu_mode(s: f64, gamma: f64) -> NuMode {
    match exponent_table(s, gamma).map(|t| t.nu) {
        Ok(Nu::One) => NuMode::One,
        _ => NuMode::Two,
    }
}

/// Fit location: the configured `x0`, else the detected branching point
/// closest to the origin, else the origin.
fn branching_x0(ctx: &mut Ctx, u: &GridFunction, beta: f64, nu: NuMode) -> Result<f64, CliError> {
    let rep = detect_branching(u, nu, Tolerances::default_for(u.grid.h(), beta))?;
    let mut w = ctx.create("branching.csv")?;
    write_branching(&rep, &mut w)?;
    w.flush()?;
    ctx.note("branching_points", rep.points().len());
    ctx.note("identically_zero", rep.identically_zero);
    Ok(match (ctx.cfg.x0, rep.nearest(0.0)) {
        (Some(x), _) => x,
        (None, Some(c)) => c.x0,
        (None, None) => 0.0,
    })
}

fn run_solve(ctx: &mut Ctx) -> Result<(), CliError> {
    let op = assemble(grid(ctx.cfg)?, ctx.cfg.s, QuadratureConfig::default())?;
    let (rep, amp) = nonlocal_solve(ctx, &op)?;
    ctx.note("amplitude_used", fmt_f64(amp));
    let core = detect_dead_core(&rep.u, ctx.cfg.tau);
    ctx.note("dead_core_measure", fmt_f64(core.measure));
    ctx.note("dead_core_intervals", core.intervals.len());
    ctx.write_solution("solution", &rep)?;
    check(rep).map(|_| ())
}

fn local_boundary(cfg: &ExperimentConfig) -> Result<(f64, f64), CliError> {
    Ok(match cfg.boundary {
        Some(Boundary::Values(l, r)) => (l, r),
        Some(Boundary::Profile) => {
            let p = exact_local_profile(cfg.gamma)?;
            (p.eval(-cfg.a), p.eval(cfg.a))
        }
        None => {
            let amp = match cfg.amplitude {
                Amplitude::Value(v) => v,
                Amplitude::Critical => 1.0,
            };
            shape_data(cfg, amp)?.edge_values()
        }
    })
}

fn run_solve_local(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let boundary = local_boundary(cfg)?;
    let rep = solve_local(grid(cfg)?, boundary, &reaction(cfg)?, &solver_config(cfg)?)?;
    ctx.note("boundary_left", fmt_f64(boundary.0));
    ctx.note("boundary_right", fmt_f64(boundary.1));
    let core = detect_dead_core(&rep.u, cfg.tau);
    ctx.note("dead_core_measure", fmt_f64(core.measure));
    ctx.note("dead_core_intervals", core.intervals.len());
    if cfg.reaction == deadcore::ReactionMode::OnePhase && rep.converged {
        match one_phase_branching_check(&rep) {
            Ok(chk) => {
                ctx.note("free_boundary", fmt_f64(chk.x_star));
                ctx.note("free_boundary_branching", chk.passed);
            }
            Err(deadcore::Error::NoFreeBoundary) => ctx.note("free_boundary", "none"),
            Err(e) => return Err(e.into()),
        }
    }
    ctx.write_solution("solution", &rep)?;
    check(rep).map(|_| ())
}

fn fit_rows(ctx: &mut Ctx, u: &GridFunction, x0: f64) -> Result<(ExponentFit, ExponentFit), CliError> {
    let cfg = ctx.cfg;
    let table = exponent_table(cfg.s, cfg.gamma)?;
    let (r0, r1, k) = window(cfg);
    let f0 = fit_growth_exponent(u, x0, r0, r1, k, 0)?.with_target(table.target);
    let f1 = fit_growth_exponent(u, x0, r0, r1, k, 1)?.with_target(table.gradient_target);
    for (name, fit) in [("fits.csv", &f0), ("gradient_fits.csv", &f1)] {
        let mut w = ctx.create(name)?;
        write_fits(&[(cfg.s, cfg.gamma, fit)], &mut w)?;
        w.flush()?;
    }
    ctx.note("schauder", fmt_f64(table.schauder));
    Ok((f0, f1))
}

fn run_exponent(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let op = assemble(grid(cfg)?, cfg.s, QuadratureConfig::default())?;
    let (rep, amp) = nonlocal_solve(ctx, &op)?;
    ctx.note("amplitude_used", fmt_f64(amp));
    ctx.write_solution("solution", &rep)?;
    let rep = check(rep)?;
    let beta = rep.beta();
    let x0 = branching_x0(ctx, &rep.u, beta, nu_mode(cfg.s, cfg.gamma))?;
    ctx.note("x0", fmt_f64(x0));
    let (f0, f1) = fit_rows(ctx, &rep.u, x0)?;
    ctx.summary.messages.push(format!(
        "slope={} target={} gradient_slope={} gradient_target={}",
        f0.slope,
        f0.target.unwrap_or(f64::NAN),
        f1.slope,
        f1.target.unwrap_or(f64::NAN)
    ));
    Ok(())
}

fn run_blowup(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let op = assemble(grid(cfg)?, cfg.s, QuadratureConfig::default())?;
    let (rep, amp) = nonlocal_solve(ctx, &op)?;
    ctx.note("amplitude_used", fmt_f64(amp));
    ctx.write_solution("solution", &rep)?;
    let rep = check(rep)?;
    let x0 = branching_x0(ctx, &rep.u, rep.beta(), nu_mode(cfg.s, cfg.gamma))?;
    let (fit, _) = fit_rows(ctx, &rep.u, x0)?;
    let constant = fit.constant();
    let mut w = ctx.create("blowup.csv")?;
    writeln!(w, "r,sup_b1,constant")?;
    for &r in &cfg.r_list {
        let v = blow_up(&rep.u, x0, r, cfg.s, cfg.gamma)?;
        let sup = sup_on_ball(&v, 0.0, 1.0)?;
        writeln!(w, "{},{},{}", fmt_f64(r), fmt_f64(sup), fmt_f64(constant))?;
    }
    w.flush()?;
    ctx.note("x0", fmt_f64(x0));
    ctx.note("fit_constant", fmt_f64(constant));
    Ok(())
}

fn run_compare(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let op = assemble(grid(cfg)?, cfg.s, QuadratureConfig::default())?;
    let sum = comparison_campaign(&op, &reaction(cfg)?, &solver_config(cfg)?, cfg.pairs, cfg.seed)?;
    let mut w = ctx.create("compare.csv")?;
    writeln!(w, "pair,holds,max_violation,tolerance")?;
    for (k, o) in sum.outcomes.iter().enumerate() {
        writeln!(w, "{k},{},{},{}", o.holds, fmt_f64(o.max_violation), fmt_f64(o.tolerance))?;
    }
    w.flush()?;
    ctx.note("failures", sum.failures);
    ctx.note("max_violation", fmt_f64(sum.max_violation));
    ctx.summary.messages.push(format!("pairs={} failures={}", sum.pairs, sum.failures));
    Ok(())
}

fn run_liouville(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let op = assemble(grid(cfg)?, cfg.s, QuadratureConfig::default())?;
    let (rep, _) = nonlocal_solve(ctx, &op)?;
    ctx.write_solution("solution", &rep)?;
    let rep = check(rep)?;
    let radii = cfg.radii.clone().unwrap_or_else(|| vec![cfg.a / 8.0, cfg.a / 4.0, cfg.a / 2.0, cfg.a]);
    let probe = liouville_probe(&rep.u, cfg.s, cfg.gamma, &radii, true, 10.0 * cfg.residual_tol)?;
    let mut w = ctx.create("liouville.csv")?;
    writeln!(w, "radius,q")?;
    for (r, q) in probe.radii.iter().zip(&probe.q) {
        writeln!(w, "{},{}", fmt_f64(*r), fmt_f64(*q))?;
    }
    w.flush()?;
    ctx.note("class", probe.class);
    ctx.note("conclusion_holds", probe.conclusion_holds.map_or("n/a".to_string(), |b| b.to_string()));
    Ok(())
}

fn run_slimit(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let Amplitude::Value(amp) = cfg.amplitude else {
        return Err(CliError::Validation("slimit needs a numeric amplitude".into()));
    };
    let data = shape_data(cfg, amp)?;
    let opts = SLimitOptions::default();
    let rows = s_limit_study(grid(cfg)?, &data, &reaction(cfg)?, &cfg.s_list, &solver_config(cfg)?, &opts)?;
    let mut w = ctx.create("study.csv")?;
    write_study(&rows, &mut w)?;
    w.flush()?;
    for r in &rows {
        if let Some(a) = r.critical_amplitude {
            ctx.note(&format!("critical_amplitude_s{}", r.s), fmt_f64(a));
        }
    }
    Ok(())
}

fn run_validate(ctx: &mut Ctx) -> Result<(), CliError> {
    let d = validate_params(ctx.cfg.s, ctx.cfg.gamma);
    ctx.summary.messages.push(d.to_string());
    if d.level == Level::Error {
        return Err(CliError::Validation(format!("{}: {}", d.code, d.message)));
    }
    Ok(())
}

/// Files a run of `mode` writes.
pub fn outputs(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Solve | Mode::SolveLocal => &["solution.csv", "solution_trace.csv", "run.meta"],
        Mode::Exponent => &["solution.csv", "solution_trace.csv", "branching.csv", "fits.csv", "gradient_fits.csv", "run.meta"],
        Mode::Blowup => &[
            "solution.csv",
            "solution_trace.csv",
            "branching.csv",
            "fits.csv",
            "gradient_fits.csv",
            "blowup.csv",
            "run.meta",
        ],
        Mode::Compare => &["compare.csv", "run.meta"],
        Mode::Liouville => &["solution.csv", "solution_trace.csv", "liouville.csv", "run.meta"],
        Mode::Slimit => &["study.csv", "run.meta"],
        Mode::Validate => &[],
    }
}

/// Human-readable plan for `--dry-run`.
pub fn plan(cfg: &ExperimentConfig, out: &Path) -> Vec<String> {
    let mut lines = vec![format!("plan: {} -> {}", cfg.mode, out.display())];
    lines.extend(cfg.summary().into_iter().map(|(k, v)| format!("  {k} = {v}")));
    let files = outputs(cfg.mode);
    if !files.is_empty() {
        lines.push(format!("  writes: {}", files.join(", ")));
    }
    lines
}

/// Validates `cfg` and runs it, writing artifacts under `opts.out`.
pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let warnings = validate_config(cfg)?;
    let mut summary = RunSummary { files: Vec::new(), messages: warnings.iter().map(|w| format!("warning: {w}")).collect() };
    if opts.dry_run {
        summary.messages.extend(plan(cfg, &opts.out));
        return Ok(summary);
    }
    if cfg.mode != Mode::Validate {
        fs::create_dir_all(&opts.out)?;
    }
    let mut ctx = Ctx { cfg, out: &opts.out, summary, meta: Vec::new() };
    let result = match cfg.mode {
        Mode::Solve => run_solve(&mut ctx),
        Mode::SolveLocal => run_solve_local(&mut ctx),
        Mode::Exponent => run_exponent(&mut ctx),
        Mode::Blowup => run_blowup(&mut ctx),
        Mode::Compare => run_compare(&mut ctx),
        Mode::Liouville => run_liouville(&mut ctx),
        Mode::Slimit => run_slimit(&mut ctx),
        Mode::Validate => return run_validate(&mut ctx).map(|_| ctx.summary),
    };
    // Metadata is written even when the solve did not converge.
    let converged = !matches!(result, Err(CliError::NotConverged { .. }));
    if result.is_ok() || !converged {
        let summary = ctx.finish()?;
        return result.map(|_| summary);
    }
    result.map(|_| RunSummary::default())
}
