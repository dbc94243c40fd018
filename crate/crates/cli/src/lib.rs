//! Configuration-driven experiment runner for sequential maximum-confidence
//! discrimination.
//!
//! A run validates an [`ExperimentConfig`] against the bundled JSON schema,
//! executes the experiment for its `kind` and writes two files into the
//! output directory: the data (`<stem>.csv` or `<stem>.json`) and the
//! verification block (`<stem>.checks.json`). The process exits with
//! [`cli::EXIT_OK`] when every check passes, [`cli::EXIT_CHECKS_FAILED`] when
//! a check fails and [`cli::EXIT_ERROR`] on invalid input or I/O failure.

#![forbid(unsafe_code)]

pub mod checks;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod schema;

pub use config::ExperimentConfig;
pub use error::CliError;
