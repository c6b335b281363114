//! Std companion to `srp-core`: dataset loading (IDX, CSV), a synthetic
//! MNIST-format digit generator, model checkpoints, evaluation and analysis
//! reports, and the plumbing behind the `srp` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod csv_data;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod idx;
pub mod report;
pub mod synth;
pub mod trace;

pub use checkpoint::Checkpoint;
pub use config::{Arch, Command, RunConfig};
pub use dataset::{DatasetHandle, Standardization};
pub use error::{Result, ToolError};
pub use eval::{run_eval, EvalConfig, MetricsRow};
