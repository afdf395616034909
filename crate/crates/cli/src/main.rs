use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use deadcore_cli::{run_config, CliError, ExperimentConfig, Mode, RunOptions};

#[derive(Parser)]
#[command(name = "deadcore", version, about = "Two-phase nonlocal dead-core experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nonlocal solve with exterior data.
    Solve(Common),
    /// Local (s = 1) two-point boundary problem.
    SolveLocal(Common),
    /// Growth-exponent fit at a branching point.
    Exponent(Common),
    /// Blow-up sequence at a branching point.
    Blowup(Common),
    /// Randomized comparison-principle campaign.
    Compare(Common),
    /// Growth probe on large balls.
    Liouville(Common),
    /// Distance to the local solution as s -> 1.
    Slimit(Common),
    /// Parameter check with exponent table.
    Validate(Common),
    /// Run each config in the mode it names.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config file; repeat to run several.
    #[arg(long = "config", value_name = "PATH")]
    configs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads when several configs are given.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the plan without computing.
    #[arg(long)]
    dry_run: bool,
}

impl Command {
    fn split(self) -> (Option<Mode>, Common) {
        match self {
            Command::Solve(c) => (Some(Mode::Solve), c),
            Command::SolveLocal(c) => (Some(Mode::SolveLocal), c),
            Command::Exponent(c) => (Some(Mode::Exponent), c),
            Command::Blowup(c) => (Some(Mode::Blowup), c),
            Command::Compare(c) => (Some(Mode::Compare), c),
            Command::Liouville(c) => (Some(Mode::Liouville), c),
            Command::Slimit(c) => (Some(Mode::Slimit), c),
            Command::Validate(c) => (Some(Mode::Validate), c),
            Command::Run(c) => (None, c),
        }
    }
}

fn load(path: &Path, mode: Option<Mode>, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(m) = mode {
        match cfg.line_of("mode") {
            Some(line) if cfg.mode != m => {
                return Err(CliError::config(line, format!("config mode '{}' conflicts with subcommand '{m}'", cfg.mode)));
            }
            _ => cfg.mode = m,
        }
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run_one(path: Option<&Path>, out: PathBuf, mode: Option<Mode>, common: &Common) -> Result<(), CliError> {
    let cfg = match path {
        Some(p) => load(p, mode, common.seed)?,
        None => {
            let mut cfg = ExperimentConfig { mode: mode.unwrap_or(Mode::Solve), ..Default::default() };
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            cfg
        }
    };
    let summary = run_config(&cfg, &RunOptions { out, dry_run: common.dry_run })?;
    for m in &summary.messages {
        println!("{m}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn report(label: &str, result: Result<(), CliError>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {label}{e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common) = cli.command.split();
    let code = match common.configs.len() {
        0 if mode.is_none() => report("", Err(CliError::Validation("run needs at least one --config".into()))),
        0 => report("", run_one(None, common.out.clone(), mode, &common)),
        1 => report("", run_one(Some(&common.configs[0]), common.out.clone(), mode, &common)),
        _ => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(common.jobs.max(1)).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let codes: Vec<i32> = pool.install(|| {
                common
                    .configs
                    .par_iter()
                    .map(|p| {
                        let stem = p.file_stem().map_or_else(|| "config".into(), |s| s.to_os_string());
                        let label = format!("{}: ", p.display());
                        report(&label, run_one(Some(p), common.out.join(stem), mode, &common))
                    })
                    .collect()
            });
            codes.into_iter().max().unwrap_or(0)
        }
    };
    ExitCode::from(code as u8)
}
