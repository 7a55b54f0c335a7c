use std::path::PathBuf;

use thiserror::Error;

/// Errors shared across the analysis modules.
#[derive(Debug, Error)]
pub enum AuditError {
    #[error("package name {raw:?} is empty after normalization")]
    EmptyName { raw: String },

    #[error("malformed version {text:?}")]
    MalformedVersion { text: String },

    #[error("malformed version specifier {text:?}")]
    MalformedSpecifier { text: String },

    #[error("{path}:{line}: malformed record: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: duplicate package {name:?}")]
    DuplicatePackage {
        path: PathBuf,
        line: usize,
        name: String,
    },

    #[error("unknown package {0:?}")]
    UnknownPackage(String),

    #[error("unknown maintainer {0:?}")]
    UnknownMaintainer(String),

    #[error("{dependent:?} does not directly depend on {package:?}")]
    NotADependent { dependent: String, package: String },

    #[error("advisory {0:?} has no fix date")]
    NoFixDate(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AuditError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AuditError::Io {
            path: path.into(),
            source,
        }
    }
}
