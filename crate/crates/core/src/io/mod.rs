//! Configuration and output formats used by the `heat` binary.

pub mod config;
pub mod csv;
pub mod svg;

pub use config::{parse_config, ConfigError, InitialCondition, Mode, Precision, RunConfig};
pub use csv::{
    emit_bench_csv, emit_ensemble_csv, emit_trajectory_csv, format_f64, read_trajectory_csv,
};
pub use svg::{emit_svg_lines, render_svg, ChartOptions, Series};
