//! Synthetic benchmarks: data generation, sweeps and reporting.

mod config;
mod data;
mod report;
mod run;

pub use config::{Algorithm, ExperimentConfig};
pub use data::{gen_linreg, load_dataset, read_dataset_csv, save_dataset, write_dataset_csv, LinRegData};
pub use report::{
    emit_csv, emit_plot_script, mean_stderr, parse_results_csv, plot_script, results_csv_string, summarize, write_results_csv, ResultRow, XAxis,
    RESULT_HEADER,
};
pub use run::{grid_for, run_experiment, ExperimentOutput, GridPoint, GridRecord};
