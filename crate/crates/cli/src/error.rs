use copro::image_io::ImageIoError;
use copro::{BusError, CodecError, KernelError, PipelineError};
use thiserror::Error;

/// Anything that stops a run before a verdict exists. All of these map to
/// exit status 2; functional failures are verdicts, not errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FUNCTIONAL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
