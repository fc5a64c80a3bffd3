//! Companion crate to `mable-core`: sampling from fitted models, bootstrap
//! standard errors, benchmark comparator estimators, the Monte Carlo
//! simulation harness, file formats, and the command-line interface.

pub mod bootstrap;
pub mod cli;
pub mod comparators;
pub mod datasets;
pub mod input;
pub mod report;
pub mod sampler;
pub mod sim;

pub use bootstrap::{bootstrap_se, BootstrapReport};
pub use report::{write_atomic, FitReportFile};
pub use sampler::FittedSampler;
pub use sim::{run_monte_carlo, MetricTable, Model, SimScenario};
