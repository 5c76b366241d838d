//! Configuration-driven experiment runner, CSV emission and run comparison.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{parse_ini, parse_override, ExperimentConfig};
pub use report::{compare_runs, diff_table, read_report, CheckRow, DiffRow, RunReport, Table, Verdict};
pub use suites::{run_experiment, SUITES};
