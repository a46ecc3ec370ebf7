//! Command-line front end for `holonomy-core`: job files in, JSON reports and
//! CSV tables out.
//!
//! Exit codes: 0 on success, 1 for configuration or I/O problems, 2 when a
//! computation fails or a verification criterion is not met.

pub mod config;
pub mod jobs;
pub mod output;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use config::{parse_config, Config, ConfigError, ConfigErrors, JobSpec, MAX_STEPS};
use jobs::{run_job, JobError, JobReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Job(#[from] JobError),
    #[error("{failed} of {total} verification criteria failed")]
    Verify { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Job(_) | CliError::Verify { .. } => 2,
        }
    }
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

/// Apply command-line overrides of the seed and step counts.
pub fn apply_overrides(config: &mut Config, seed: Option<u64>, steps: Option<usize>) -> Result<(), ConfigErrors> {
    let mut errs = Vec::new();
    if let Some(s) = seed {
        if s > i64::MAX as u64 {
            errs.push(ConfigError {
                path: "--seed".into(),
                message: format!("{s} does not fit in a signed 64-bit integer"),
            });
        }
    }
    if let Some(n) = steps {
        if !(2..=MAX_STEPS).contains(&n) {
            errs.push(ConfigError {
                path: "--steps".into(),
                message: format!("{n} is out of range [2, {MAX_STEPS}]"),
            });
        }
    }
    if !errs.is_empty() {
        return Err(ConfigErrors(errs));
    }
    for job in &mut config.jobs {
        if let Some(s) = seed {
            job.seed = s;
        }
        if let Some(n) = steps {
            match &mut job.spec {
                JobSpec::Holonomy(h) => h.steps = n,
                JobSpec::Evolve(e) => e.steps = n,
                _ => {}
            }
        }
    }
    Ok(())
}

/// Run all jobs, possibly concurrently; reports come back in config order.
/// The first failing job in config order decides the error.
pub fn run_config(config: &Config) -> Result<Vec<JobReport>, JobError> {
    config.jobs.par_iter().map(run_job).collect::<Vec<_>>().into_iter().collect()
}

/// Cap rayon's global pool from `HOLONOMY_THREADS`.
pub fn configure_threads(value: Option<&str>) -> Result<(), ConfigErrors> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => {
            return Err(ConfigErrors(vec![ConfigError {
                path: "HOLONOMY_THREADS".into(),
                message: format!("`{v}` is not a positive integer"),
            }]))
        }
    };
    // a pool may already exist when embedded in tests
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
