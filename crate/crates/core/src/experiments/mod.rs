//! Batch experiments: configuration, sweeps and CSV output.

pub mod config;
pub mod sweep;

pub use config::{ExperimentConfig, ReportMode, SweepVariable, UserModel};
pub use sweep::{bounds_table, draw_user, dump_placement, run_sweep, to_csv, CapacityReport, RowBounds};
