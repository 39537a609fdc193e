//! Library side of the `geompert` command: model files, the
//! expand/verify/sweep pipeline, and reports.

pub mod document;
pub mod error;
pub mod numfmt;
pub mod pipeline;
pub mod report;

pub use document::{parse_model, ModelDocument};
pub use error::{CliError, Stage};
pub use pipeline::{run_pipeline, run_sweep, CheckSet, Settings};
pub use report::{Report, Verdict};
