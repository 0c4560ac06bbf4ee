//! Files, figures and the command line around `divisim-core`.
//!
//! - [`record`]: JSON records for distributions, fit reports and model files,
//! - [`io`]: CSV ingest and output, written atomically,
//! - [`figures`]: the pipelines behind `divisim reproduce`,
//! - [`cli`]: the `divisim` command.

pub mod cli;
mod error;
pub mod figures;
pub mod io;
pub mod record;

pub use error::Error;
