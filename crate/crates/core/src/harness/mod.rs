//! Monte Carlo experiments, configuration, CSV output and the command line.

pub mod cli;
pub mod config;
pub mod stats;
pub mod sweep;

pub use cli::cli_main;
pub use config::{ChannelKind, ExperimentConfig, Mode, Receiver};
pub use stats::{paired_difference, wilson_interval, MeanEstimate, Rate};
pub use sweep::{
    run, run_coded_sweep, run_components, run_floor_curve, run_mismatch_sweep, run_mse_sweep, run_uncoded_sweep,
    write_csv, SweepRow,
};
