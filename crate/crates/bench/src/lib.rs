//! Benchmark harness for the `pimhe` engine.
//!
//! Microbenchmarks sweep the add and multiply kernels over item counts;
//! workload runs drive the mean, variance and regression pipelines. Runs
//! that fit desk-scale limits execute functionally and are checked against
//! host references before anything is written; larger ones are priced with
//! the cost model.

pub mod error;
pub mod report;
pub mod run;
pub mod spec;

pub use error::{BenchError, Result};
pub use run::{run, Outcome, Row};
pub use spec::{BenchSpec, Cli, Format, Mode, CONFIG_ENV};

/// Resolves flags, runs, and writes the report.
pub fn execute(cli: Cli, env_config: Option<std::ffi::OsString>) -> Result<Outcome> {
    let spec = BenchSpec::resolve(cli, env_config)?;
    let outcome = run(&spec)?;
    report::write_report(&outcome, spec.format, spec.out.as_deref())?;
    Ok(outcome)
}
