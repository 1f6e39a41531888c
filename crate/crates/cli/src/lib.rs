//! Command implementations behind the `cscd` binary: dataset ingestion,
//! average-contrast-map rendering, feature extraction, training with
//! hard-negative mining, detection and evaluation. Everything here is a
//! plain function over a resolved [`cscd_core::config::PipelineConfig`] so
//! the end-to-end paths are testable without spawning processes.

pub mod commands;
pub mod dataset;
