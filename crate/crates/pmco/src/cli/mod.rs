//! Command-line entry points: `optimize`, `verify`, and `analyze`.
//!
//! All three read a JSON config, write structured output into a
//! directory, and use fixed exit codes: 0 success / all checks pass,
//! 1 verification failures, 2 configuration errors, 3 numeric aborts.

mod analyze;
mod verify;

pub use analyze::{cmd_analyze, AnalyzeConfig};
pub use verify::{cmd_verify, VerifyConfig, VerifyRecord};

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::optimizer::{run, RunConfig};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Serialize)]
struct OptimizeResult<'a> {
    best_x: Vec<f64>,
    best_f: f64,
    iterations: usize,
    converged: bool,
    objective: &'a str,
    mode: &'a crate::optimizer::Mode,
    seed: u64,
}

pub fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(Error::from)
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

/// Run an optimization and write trace.jsonl, summary.csv, and
/// result.json into `out`.
pub fn cmd_optimize(
    config_path: &Path,
    out: &Path,
    seed_override: Option<u64>,
    workers_override: Option<usize>,
) -> Result<()> {
    let mut config: RunConfig = read_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    if let Some(w) = workers_override {
        config.workers = Some(w);
    }
    config.validate()?;
    ensure_out_dir(out)?;
    let outcome = run(&config)?;

    let mut trace_file = fs::File::create(out.join("trace.jsonl"))?;
    for record in &outcome.trace.records {
        serde_json::to_writer(&mut trace_file, record)?;
        trace_file.write_all(b"\n")?;
    }
    let mut csv = fs::File::create(out.join("summary.csv"))?;
    writeln!(csv, "t,f_best,max_speed,spread")?;
    for r in &outcome.trace.records {
        writeln!(csv, "{},{},{},{}", r.t, r.f_best, r.max_speed, r.spread)?;
    }
    let result = OptimizeResult {
        best_x: outcome.best_x.iter().cloned().collect(),
        best_f: outcome.best_f,
        iterations: outcome.iterations,
        converged: outcome.converged,
        objective: &config.objective,
        mode: &config.mode,
        seed: config.seed,
    };
    let mut result_file = fs::File::create(out.join("result.json"))?;
    serde_json::to_writer_pretty(&mut result_file, &result)?;
    result_file.write_all(b"\n")?;
    Ok(())
}

/// Map an error to the documented exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NumericAbort { .. } | Error::InfeasibleOmega(_) => EXIT_NUMERIC,
        Error::Io(_) => EXIT_CONFIG,
        Error::Json(_) | Error::InvalidConfig(_) | Error::DimensionMismatch(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}
