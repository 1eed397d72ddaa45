//! Experiment harness around `wavesel-core`: configuration parsing, dataset
//! synthesis over (temperature, light) grids, N_tr sweeps, and report files.

pub mod config;
pub mod error;
pub mod harness;

pub use config::{config_reference, parse_surface_mode, ExperimentConfig};
pub use error::{CliError, Result};
pub use harness::{
    derive_seed, emit_reports, generate_dataset, grid_environments, plot_script, read_sweep_csv,
    run_ntr_sweep, write_sweep_csv, Pipeline, ScatterSet, SweepResult, SweepRow,
};
