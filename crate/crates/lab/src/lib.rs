//! Experiment runner on top of `qumi_core`.
//!
//! Every experiment takes a resolved [`ExperimentConfig`], evaluates its grid
//! in parallel and returns a [`Report`] whose rows are in grid order, so the
//! emitted CSV or JSON is byte-identical across runs with the same config.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ConfigOverrides, Experiment, ExperimentConfig, NoiseOverrides, OutputFormat};
pub use experiments::{
    run, DephasingRow, LossRow, OptimalRow, PermanentRow, RandomUnitaryRow, Report, RunOptions,
    StrategyRow,
};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qumi_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) => 2,
            _ => 1,
        }
    }
}
