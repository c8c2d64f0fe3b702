//! Stage-cached pipeline around the `aetas` library: configuration,
//! manifest bookkeeping, stage bodies and SVG reports.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use config::{Overrides, PipelineConfig};
pub use error::{CliError, CliResult};
pub use pipeline::{Outcome, Pipeline, Stage};
