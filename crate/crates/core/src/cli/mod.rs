//! Command-line front end: JSON configuration, data emitters and dispatch.
//!
//! Data goes to the configured sink (a file or stdout); progress and
//! diagnostics go to stderr. Exit codes: 0 success, 1 validation error,
//! 2 integration diagnostic, 3 I/O error.

mod args;
mod config;
mod emit;
mod run;

pub use args::{apply_override, run_cli};
pub use config::{
    parse_config, parse_config_value, ArScanConfig, CaseVSelect, Format, GridConfig, Mode,
    OutputConfig, RasterConfig, RunConfig, SweepPoint,
};
pub use emit::{
    emit_ar_report, emit_intervals, emit_raster, emit_trajectory, fmt_num, round_sig,
    trajectory_rows, ArReport, TrajectoryRow, TRAJECTORY_COLUMNS,
};
pub use run::{exit_code, run, run_to_exit_code};
