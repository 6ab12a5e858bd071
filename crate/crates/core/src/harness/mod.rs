//! Monte Carlo link simulation: frames through encoder, modulator, channel
//! and relay receiver, with error counts against the true NC message.

mod config;
mod output;
mod sim;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{CodeSpec, Modulation, Scheme, SimulationConfig, Stopping};
pub use output::{config_hash, csv_string, format_decimal, parse_csv, write_csv, write_sidecar, CSV_HEADER};
pub use sim::{
    interpolate_crossing, run_point, run_sweep, FrameOutcome, Metric, PointResult, RelayTrial, Simulation, SweepResult,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Invalid or contradictory configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Failure while simulating.
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    pub(crate) fn config(e: impl std::fmt::Display) -> Self {
        HarnessError::Config(e.to_string())
    }

    pub(crate) fn runtime(e: impl std::fmt::Display) -> Self {
        HarnessError::Runtime(e.to_string())
    }

    /// Process exit status for this error: 2 for configuration problems, 1
    /// otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}
