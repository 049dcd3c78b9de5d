//! Batch driver: a TOML config in, CSV/JSON/OBJ artifacts out.
//!
//! Everything that can be rejected up front (schema, lattice, potential,
//! coefficient tables) is checked before the output directory is touched.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod potential;
pub mod tasks;
pub mod verify;

use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use crate::config::{load_config, ConfigError, RunConfig};
use crate::output::{write_atomic, Artifact};
use crate::potential::build_potential;
use crate::tasks::{run_task, Inputs};
use crate::verify::{run_verify, Status};

pub const THREADS_ENV: &str = "BLOCH_THREADS";
pub const DEFAULT_OUTPUT: &str = "bloch-out";
pub const DEFAULT_SEED: u64 = 0;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(ConfigError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{THREADS_ENV} must be a positive integer, got {0:?}")]
    ThreadsEnv(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { path, source } => CliError::Read { path, source },
            other => CliError::Config(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ThreadsEnv(_) => EXIT_CONFIG,
            CliError::Read { .. } | CliError::Write { .. } => EXIT_IO,
            CliError::ThreadPool(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Verify,
}

/// Command-line overrides; each beats the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub output_dir: PathBuf,
    pub failures: Vec<String>,
    /// Human-readable report, one line per check or failure.
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_NUMERICAL
        }
    }
}

/// Thread count: flag, then environment, then config, then one per core.
pub fn resolve_threads(
    flag: Option<usize>,
    env: Option<&str>,
    config: Option<usize>,
) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    if let Some(text) = env.filter(|s| !s.trim().is_empty()) {
        return match text.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::ThreadsEnv(text.to_string())),
        };
    }
    Ok(config)
}

fn resolve_output(config: &RunConfig, config_dir: &Path, flag: Option<PathBuf>) -> PathBuf {
    match (flag, &config.output) {
        (Some(dir), _) => dir,
        (None, Some(dir)) if dir.is_relative() => config_dir.join(dir),
        (None, Some(dir)) => dir.clone(),
        (None, None) => PathBuf::from(DEFAULT_OUTPUT),
    }
}

fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    for artifact in artifacts {
        write_atomic(dir, artifact).map_err(|source| CliError::Write {
            path: dir.join(&artifact.name),
            source,
        })?;
    }
    Ok(())
}

pub fn execute(mode: Mode, config_path: &Path, overrides: Overrides) -> Result<Outcome, CliError> {
    let env = std::env::var(THREADS_ENV).ok();
    execute_with_env(mode, config_path, overrides, env.as_deref())
}

/// As [`execute`], with the thread environment variable passed explicitly.
pub fn execute_with_env(
    mode: Mode,
    config_path: &Path,
    overrides: Overrides,
    threads_env: Option<&str>,
) -> Result<Outcome, CliError> {
    let config = load_config(config_path)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let lattice = config.build_lattice()?;
    let potential = build_potential(&config.potential, &lattice, config_dir)?;
    let threads = resolve_threads(overrides.threads, threads_env, config.threads)?;
    let seed = overrides.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let output_dir = resolve_output(&config, config_dir, overrides.output);

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    let inputs = Inputs {
        config: &config,
        lattice,
        potential,
    };
    let resolved = json!({
        "conventions_version": bloch_core::CONVENTIONS_VERSION,
        "config": config,
        "grid_size": config.grid_size(),
        "threads": threads.unwrap_or_else(|| pool.current_num_threads()),
        "seed": seed,
        "reference_shift": bloch_core::schrodinger::REFERENCE_SHIFT,
    });

    match mode {
        Mode::Run => {
            let out = pool.install(|| run_task(&inputs));
            let mut metadata = resolved;
            metadata["results"] = out.metadata;
            metadata["summary_tolerances"] = json!(out.summary.tolerances);
            let mut artifacts = out.artifacts;
            artifacts.push(Artifact::json("summary.json", &out.summary));
            artifacts.push(Artifact::json("metadata.json", &metadata));
            write_all(&output_dir, &artifacts)?;
            let lines = out
                .summary
                .failures
                .iter()
                .map(|f| format!("FAIL {f}"))
                .collect();
            Ok(Outcome {
                output_dir,
                failures: out.summary.failures,
                lines,
            })
        }
        Mode::Verify => {
            let report = pool.install(|| run_verify(&inputs, seed));
            let lines: Vec<String> = report.checks.iter().map(|c| c.line()).collect();
            let failures = report
                .checks
                .iter()
                .filter(|c| c.status == Status::Fail)
                .map(|c| c.name.clone())
                .collect();
            write_all(
                &output_dir,
                &[
                    Artifact::json("verify.json", &report),
                    Artifact::json("metadata.json", &resolved),
                ],
            )?;
            Ok(Outcome {
                output_dir,
                failures,
                lines,
            })
        }
    }
}
