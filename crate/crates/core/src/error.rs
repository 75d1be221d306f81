use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the segmentation toolkit.
#[derive(Error, Debug)]
pub enum Error {
    /// A file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Raster encode/decode failure.
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// Input data is structurally invalid (zero-sized image, bad label matrix, ...).
    #[error("format error: {0}")]
    Format(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The value cannot be represented in the target encoding.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Malformed XML or JSON document.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: u32, column: u32, message: String },

    /// The synthetic generator could not place a line without overlap.
    #[error("placement error: {0}")]
    Placement(String),

    /// Invalid configuration file or parameter value.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        match source {
            image::ImageError::IoError(e) => Error::io(path, e),
            other => Error::Image {
                path: path.into(),
                source: other,
            },
        }
    }
}
