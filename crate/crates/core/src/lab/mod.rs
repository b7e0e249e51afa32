//! Scenario files, seeded ensemble runs, and the artifacts they leave on
//! disk.
//!
//! A run is a pure function of its [`ScenarioConfig`]: every replica draws
//! from its own stream and results are folded in replica order, so the
//! worker count never changes an output byte. The one exception is the
//! wall-clock block of `manifest.json`, which is why the manifest is not in
//! its own file inventory.

mod config;
mod files;
mod manifest;
mod replica;
mod scenarios;

pub use config::{BoxSpec, InitialLaw, InitialState, ProcessChoice, ScenarioConfig, ScenarioKind};
pub use files::{events_csv, trajectory_csv};
pub use manifest::{
    replay, run_scenario, sha256_hex, workers_from_env, LaneSeeds, ReplayReport, RunManifest, WORKERS_ENV,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("refusing to write into {dir}: {reason}")]
    OutputInUse { dir: String, reason: String },
    #[error("{failed} of {total} replicas failed (first: {first})")]
    ReplicaFailures { failed: u64, total: u64, first: String },
    #[error("landscape: {0}")]
    Landscape(#[from] crate::landscape::LandscapeError),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Runtime(String),
}

impl LabError {
    /// Process exit code: 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 1,
        }
    }
}
