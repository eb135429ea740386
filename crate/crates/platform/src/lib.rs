//! Workspace persistence, the HTTP service and the `rsos` command line.

pub mod cli;
pub mod service;
pub mod workspace;

use std::path::PathBuf;

use rsos_core::recommender::RecommendError;
use rsos_core::vision::{MeasureError, VisionError};
use thiserror::Error;

pub use service::{router, AppState};
pub use workspace::{Fingerprint, LoadReport, Loaded, Manifest, Snapshot, SnapshotStatus, Workspace};

#[derive(Debug, Error)]
pub enum PlatformError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}: {message}")]
    Invalid { file: String, message: String },
    #[error("{} is not an ingested workspace; run `rsos ingest <dir>` first", .0.display())]
    NotIngested(PathBuf),
    #[error("{0} changed since it was ingested; re-run `rsos ingest` before mining")]
    StaleInput(String),
    #[error("no mined snapshot; run `rsos mine` first")]
    NoSnapshot,
    #[error("snapshot is stale for the current inputs; run `rsos mine` or pass --allow-stale")]
    StaleSnapshot,
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error(transparent)]
    Vision(#[from] VisionError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl PlatformError {
    /// 2 for I/O failures, 1 for everything the user can fix in their input.
    pub fn exit_code(&self) -> i32 {
        match self {
            PlatformError::Io { .. } => 2,
            _ => 1,
        }
    }
}
