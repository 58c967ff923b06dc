//! Batch runs: sweep driver, CSV tables, run manifest and plot data.

pub mod plots;
pub mod run;
pub mod table;

pub use plots::{bias_tag, emit_plot, PlotKind, PLOT_KINDS};
pub use run::{exit_code, run, BiasOutcome, RunManifest, RunOptions, RunOutcome, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use table::{fmt_f64, Table};
