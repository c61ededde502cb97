//! Batch front-end for the co-processing simulator: scenario runs,
//! golden comparison, reports and protocol dumps.

pub mod app;
pub mod error;
pub mod golden;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use golden::{compare_golden, compare_scores, GoldenReport};
pub use report::RunReport;
pub use run::{run_scenario, write_artifacts, Output, RunOptions, RunOutcome};
pub use scenario::{Scenario, TimingSource, FIXTURES_ENV};
