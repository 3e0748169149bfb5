//! Suite loading and batch execution behind the `fic` binary.

pub mod config;
pub mod runner;

pub use config::{load_suite, parse_suite, render_suite, SuiteError};
pub use runner::{run_suite, SuiteReport};
