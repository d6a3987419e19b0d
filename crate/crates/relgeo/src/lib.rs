//! Scenario runner for the relgeo verification suites.
//!
//! A scenario file names a surface, a curvature function and the command's
//! parameters; each run produces a versioned JSON report whose checks
//! decide the exit status.

pub mod commands;
pub mod error;
pub mod expr;
pub mod report;
pub mod scenario;

pub use commands::{run, Options, Outcome};
pub use error::CliError;
