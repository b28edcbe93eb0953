use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{file} not found; run `cyic {stage}` first")]
    MissingPrerequisite { file: PathBuf, stage: &'static str },
    #[error("{file} has schema_version {found}, this build reads {expected}")]
    SchemaMismatch { file: PathBuf, found: u64, expected: u32 },
    #[error("{file} is inconsistent with {other}: {reason}")]
    Stale {
        file: PathBuf,
        other: PathBuf,
        reason: String,
    },
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid-config",
            CliError::MissingPrerequisite { .. } => "missing-prerequisite",
            CliError::SchemaMismatch { .. } => "schema-mismatch",
            CliError::Stale { .. } => "stale-artifact",
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

/// Machine-readable failure written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    pub causes: Vec<String>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl ErrorReport {
    pub fn from_anyhow(err: &anyhow::Error) -> Self {
        let (kind, code) = match err.downcast_ref::<CliError>() {
            Some(e) => (e.kind(), e.exit_code()),
            None => ("runtime", 1),
        };
        ErrorReport {
            error: kind,
            message: err.to_string(),
            causes: err.chain().skip(1).map(|c| c.to_string()).collect(),
            exit_code: code,
        }
    }
}
