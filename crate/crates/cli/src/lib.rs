//! Benchmark harness comparing the asymmetric sensitivity mechanism with the
//! inverse sensitivity mechanism on repeated subsampled trials.

pub mod cli;
mod error;
pub mod experiment;
pub mod ingest;
pub mod report;
pub mod simulate;
pub mod stats;

pub use error::{BenchError, Result};
pub use experiment::{run_experiment, Dataset, ExperimentSpec, Task};
pub use report::{Format, ReportRow, TrialReport};
pub use simulate::{simulate_asymmetry, AsymmetryRow, SimulationConfig};
