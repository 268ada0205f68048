//! Experiment driver for `kwise-core`: TOML configuration, the scalar,
//! threshold, dichotomy, sweep and limit experiments, and their CSV, plot
//! and metadata output.

// negated float comparisons are deliberate: NaN must take the error path
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::Path;
use std::time::Instant;

pub use config::Config;
pub use error::LabError;
pub use experiments::Experiment;

/// Runs `experiment` on `config` with `jobs` worker threads and writes the
/// artifacts into `out`.
pub fn execute(experiment: Experiment, config: &Config, out: &Path, jobs: usize) -> Result<Vec<std::path::PathBuf>, LabError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| LabError::Config {
            line: None,
            message: format!("cannot start {jobs} worker threads: {e}"),
        })?;
    let start = Instant::now();
    let report = pool.install(|| experiments::run(experiment, config))?;
    let info = output::RunInfo {
        experiment: experiment.name(),
        config,
        jobs,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    output::write_report(out, &report, &info)
}
