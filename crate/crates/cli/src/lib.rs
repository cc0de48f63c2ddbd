//! Model files, replicated runs, CSV export, analytic queueing results and
//! the benchmark harness behind the `trajsim` command.

pub mod analytic;
pub mod bench;
pub mod export;
pub mod model;
pub mod report;
pub mod stats;
