//! Experiment harness for CT and deblurring runs of the graph-Laplacian
//! regularized iteration.

pub mod config;
pub mod run;

pub use config::{ExperimentConfig, Problem, Settings};
pub use run::{exit_code, run, run_ct, run_deblur, run_laplacian_demo, RunOutcome, REPORT_HEADER};
