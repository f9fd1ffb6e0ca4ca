//! File formats, plots and experiment commands around `uam-core`.
//!
//! The `uam` binary wraps [`experiment`]: `risk-map`, `plan`, `schedule` and
//! `sweep`, each reading one JSON [`config::ExperimentConfig`].

pub mod config;
pub mod demo;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod io;
pub mod svg;

pub use error::{Result, ToolError};
