//! Batch experiment runner on top of `martinlab-core`.
//!
//! A run reads one JSON configuration, executes the named study and writes
//! `results.csv`, `meta.json` and `summary.txt` into the output directory in
//! one atomic step.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod config;
pub mod output;
pub mod studies;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

pub use config::{ExperimentConfig, SchemaError};
pub use studies::{run_study, RunError, StudyOutput};

pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    Schema(SchemaError),
    Runtime(RunError),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) => EXIT_SCHEMA,
            Failure::Runtime(_) | Failure::Io(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Schema(e) => write!(f, "schema error: {e}"),
            Failure::Runtime(e) => write!(f, "runtime error: {e}"),
            Failure::Io(e) => write!(f, "runtime error: writing artifacts failed: {e}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    /// Overrides the configured output directory (`MARTINLAB_OUT`).
    pub out: Option<PathBuf>,
}

/// Parses, validates, runs and writes. Returns the output directory.
pub fn run(text: &str, opts: &RunOptions) -> Result<PathBuf, Failure> {
    let raw = config::parse(text).map_err(Failure::Schema)?;
    let cfg = raw.resolve().map_err(|e| Failure::Schema(e.locate(text)))?;
    let seed = opts.seed.unwrap_or(raw.seed);
    let threads = opts
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Io(e.to_string()))?;
    let start = Instant::now();
    let result = pool.install(|| run_study(&cfg, seed)).map_err(Failure::Runtime)?;
    let wall = start.elapsed().as_secs_f64();

    let out = match (&opts.out, &raw.output) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => PathBuf::from("martinlab-out"),
    };
    let echo: serde_json::Value = serde_json::from_str(text).expect("parsed above");
    let meta = json!({
        "config": echo,
        "study": raw.study.name(),
        "seed": seed,
        "threads": threads,
        "wall_time_s": wall,
        "versions": {
            "martinlab": env!("CARGO_PKG_VERSION"),
            "martinlab-core": martinlab_core::VERSION,
        },
    });
    let mut summary = format!("study: {}\nseed: {seed}\n", raw.study.name());
    for line in &result.summary {
        summary.push_str(line);
        summary.push('\n');
    }
    let files = [
        ("results.csv", output::csv(&result.rows)),
        ("meta.json", serde_json::to_string_pretty(&meta).expect("json value") + "\n"),
        ("summary.txt", summary),
    ];
    output::write_atomic(&out, &files).map_err(|e| Failure::Io(e.to_string()))
}

/// Reads a configuration file and runs it.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<PathBuf, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Schema(SchemaError::new(".", format!("cannot read {}: {e}", path.display()))))?;
    run(&text, opts)
}
