//! Configuration resolution and report writers for the `entroprec` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod emit;

pub use config::{parse_config, Command, Format, Overrides, RunConfig};
pub use emit::{emit_report, execute, run, Envelope, Outcome, Report};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{key}: {reason}")]
    Config { key: String, reason: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] entroprec::Error),
}
