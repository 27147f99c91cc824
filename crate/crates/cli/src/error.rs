use std::path::PathBuf;

use mobisim::topology::TopologyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot load topology {name}: {reason}")]
    Topology { name: String, reason: String },
    #[error(
        "invariant violated in {topology}/{model} run {run}: {detail} \
         (replay with --replay {child_seed})"
    )]
    Invariant {
        topology: String,
        model: String,
        run: usize,
        child_seed: u64,
        detail: String,
    },
    #[error("report error in {path}: {reason}")]
    Report { path: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Report { .. } => 2,
            CliError::Topology { .. } => 3,
            CliError::Invariant { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn topology(name: &str, err: TopologyError) -> Self {
        CliError::Topology {
            name: name.to_string(),
            reason: err.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
