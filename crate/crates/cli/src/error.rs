use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::schema::Violation;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", format_violations(.0))]
    Schema(Vec<Violation>),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON: {0}")]
    Json(#[source] serde_json::Error),

    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("config kind `{found}` cannot run under `{expected}`")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error(transparent)]
    Core(#[from] seqmc_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    let mut s = format!("config has {} schema violation(s):", v.len());
    for x in v {
        s.push_str("\n  ");
        s.push_str(&x.to_string());
    }
    s
}
