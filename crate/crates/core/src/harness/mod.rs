//! Experiment suites, sample families, reports and the command line.

pub mod cli;
pub mod config;
pub mod families;
pub mod report;
pub mod suites;
pub mod svg;

pub use cli::run_cli;
pub use config::{Config, Suite};
pub use families::{FamilyKind, SampleFamily};
pub use report::{Basis, Case, Check, ExperimentReport, FittedSlope};
pub use suites::{run_suite, SuiteOutput};
