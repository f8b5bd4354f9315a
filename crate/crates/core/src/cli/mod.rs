//! The `besq` command line: `classify`, `simulate`, `mc` and `verify`.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad
//! configuration, 3 numerical failure during a run.

mod config;
mod output;
mod verify;

use std::io::Write;

pub use config::{parse_config, parse_file, Command, ConfigError, Format, Model, Parsed, RunConfig, Stat, Suite};
pub use output::{csv_header, events_json, path_json, read_path_csv, write_path_csv};
pub use verify::{run_suite, CheckRow};

use crate::analysis::mc_estimate;
use crate::constructions::{build_non_unique, build_pinned_nonnegative, plan_glue, simulate_glued};
use crate::domain::classify;
use crate::error::Error;
use crate::linalg::SymmetricMatrixState;
use crate::sde::rng::component;
use crate::sde::{simulate_particles, simulate_polys, simulate_wishart, EventKind, PathRecord, RngSpec};
use crate::sympoly::elementary_all;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Entry point of the binary; `args` excludes the program name.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match parse_config(&args) {
        Ok(Parsed::Help(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Ok(Parsed::Config(cfg)) => run(&cfg, &mut stdout.lock(), &mut stderr.lock()),
        Err(e) => {
            let _ = writeln!(stderr.lock(), "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn exit_for(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Executes a validated configuration, writing reports to `out` and
/// diagnostics to `err`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cfg.command {
        Command::Classify => run_classify(cfg, out),
        Command::Simulate => run_simulate(cfg, out),
        Command::Mc => run_mc(cfg, out),
        Command::Verify => return run_verify(cfg, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(RunError::Core(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_for(&e)
        }
        Err(RunError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

enum RunError {
    Core(Error),
    Io(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

fn run_classify(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let report = classify(&cfg.params.expect("validated"), cfg.x0.as_ref().expect("validated"))?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

/// Simulates one path of the configured model on replicate `replicate`.
pub fn simulate_model(cfg: &RunConfig, replicate: u32) -> crate::Result<PathRecord> {
    let params = cfg.params.expect("validated");
    let grid = cfg.grid.as_ref().expect("validated");
    let mut rng = RngSpec::new(cfg.seed, replicate, 0);
    if cfg.zero_noise {
        rng = rng.zero_noise();
    }
    let x0 = cfg.x0.as_ref();
    match cfg.model {
        config::Model::Particles => simulate_particles(
            &params,
            x0.expect("validated"),
            grid,
            &rng.with_component(component::PARTICLES),
        ),
        config::Model::Wishart => {
            let y0 = match (&cfg.y0, x0) {
                (Some(y), _) => y.clone(),
                (None, Some(x)) => SymmetricMatrixState::diag(x.as_slice()),
                (None, None) => unreachable!("validated"),
            };
            simulate_wishart(&params, &y0, grid, &rng.with_component(component::WISHART))
        }
        config::Model::Polys => simulate_polys(
            &params,
            &elementary_all(x0.expect("validated")),
            grid,
            &rng.with_component(component::POLYS),
        ),
        config::Model::Glued => {
            let plan = plan_glue(&params, x0.expect("validated"))?;
            simulate_glued(&plan, grid, &rng)
        }
        config::Model::NonUnique => build_non_unique(&params, x0.expect("validated"), grid, &rng),
        config::Model::Pinned => build_pinned_nonnegative(&params, x0.expect("validated"), grid, &rng),
    }
}

fn run_simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let path = simulate_model(cfg, 0)?;
    match (cfg.format, &cfg.output) {
        (Format::Csv, Some(file)) => {
            write_path_csv(&path, std::fs::File::create(file)?)?;
            let mut side = file.clone().into_os_string();
            side.push(".events.json");
            std::fs::write(&side, serde_json::to_string_pretty(&events_json(&path))?)?;
        }
        (Format::Csv, None) => write_path_csv(&path, &mut *out)?,
        (Format::Json, Some(file)) => std::fs::write(file, serde_json::to_string(&path_json(&path))?)?,
        (Format::Json, None) => writeln!(out, "{}", serde_json::to_string(&path_json(&path))?)?,
    }
    Ok(())
}

/// Value of `stat` on a completed path.
pub fn evaluate_stat(stat: Stat, path: &PathRecord) -> f64 {
    let last = path.len() - 1;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    match stat {
        Stat::E(n) => path.polys(last).get(n as i64),
        Stat::X(n) => path.particles(last)[n - 1],
        Stat::HitZero(n) => flag(path.events_of(|k| *k == EventKind::HitZero { particle: n }).next().is_some()),
        Stat::WentNegative(n) => {
            flag(path.events_of(|k| *k == EventKind::WentNegative { particle: n }).next().is_some())
        }
    }
}

fn run_mc(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let base = RngSpec::new(cfg.seed, 0, 0);
    let estimate = || {
        mc_estimate(
            |path: &PathRecord| evaluate_stat(cfg.stat, path),
            |spec: &RngSpec| simulate_model(cfg, spec.replicate),
            cfg.reps,
            &base,
        )
    };
    let summary = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Io(e.to_string()))?
            .install(estimate)?,
        None => estimate()?,
    };
    let mut v = serde_json::to_value(&summary)?;
    v["stat"] = serde_json::json!(cfg.stat.to_string());
    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    Ok(())
}

fn run_verify(cfg: &RunConfig, out: &mut dyn Write) -> i32 {
    let rows = run_suite(cfg.suite.expect("validated"), cfg.p_max, cfg.cases, cfg.seed);
    let ok = rows.iter().all(|r| r.pass);
    let written = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&rows)
            .map_err(std::io::Error::other)
            .and_then(|s| writeln!(out, "{s}")),
        Format::Csv => write!(out, "{}", verify::table(&rows)),
    };
    if written.is_err() {
        return EXIT_CONFIG;
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}
