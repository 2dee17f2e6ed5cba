//! Batch front-end for the flowseg detector: detect, eval, synth and bench.
//!
//! Each command is a plain function so it can be driven from tests as well as from the
//! `flowseg` binary. Exit codes: 0 success, 1 usage or config error, 2 data error.

mod bench;
mod commands;
mod config;

pub use bench::{linear_fit, run_bench, BenchReport};
pub use commands::{run_detect, run_eval, run_synth, DetectSummary, EvalSummary};
pub use config::RunConfig;

use std::fs;
use std::path::{Path, PathBuf};

use flowseg::kv::KvError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(#[from] KvError),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

/// Files in `dir` with the given extension, sorted by file name.
pub(crate) fn list_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("cannot read directory {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::Data(format!("cannot read directory {}: {e}", dir.display())))?
            .path();
        if path.is_file() && path.extension().is_some_and(|e| e == extension) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
