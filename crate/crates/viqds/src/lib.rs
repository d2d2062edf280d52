//! File formats, reports and the command-line driver for `viqds-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod format;
pub mod report;
pub mod scenario;

pub use error::{AppError, AppResult};
pub use report::{Format, Report};
