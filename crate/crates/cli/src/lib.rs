//! Experiment harness: configuration, seeded recovery runs, analytic signal
//! tables and CSV output. The `klbss` binary is a thin wrapper around this.

// Range checks written as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod output;
pub mod runner;

pub use analytic::{run_constructions, run_signal_curves, Construction, ConstructionParams, SignalRow, Table};
pub use config::{parse_config, parse_config_str, ConfigError, ExperimentConfig, GraphKind, MethodSpec};
pub use runner::{run_independent, run_misspec, run_recovery, RecoveryRecord, Replication};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("estimator failure at n = {n}, rep = {rep}, method {method}: {source}")]
    Estimator { n: usize, rep: usize, method: String, source: klbss::Error },
    #[error(transparent)]
    Model(#[from] klbss::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl RunError {
    /// 2 for configuration problems, 3 for strict-mode estimator failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Estimator { .. } => 3,
            _ => 1,
        }
    }
}
