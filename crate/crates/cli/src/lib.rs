//! Batch experiments on matrix-generated free groups: configuration, the
//! checker pipeline and plot emission.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{Checker, ConfigError, ExperimentConfig};
pub use plot::{emit_plot, PlotKind};
pub use run::{run_config, RunOutcome, RunOverrides};
