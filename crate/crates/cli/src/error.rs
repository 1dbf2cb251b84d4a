//! Error classification and the exit-code contract:
//! 0 success, 1 usage, 2 I/O, 3 provider/auth, 4 validation.

use std::fmt;
use std::path::Path;

use embalign_core::align::TsvError;
use embalign_core::embed::{CacheError, RateConfigError};
use embalign_core::{
    AlignError, EmbedError, EvalError, MatrixError, PipelineError, PrepError, ProviderError,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Provider(String),
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Provider(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::Io(m)
            | CliError::Provider(m)
            | CliError::Validation(m) => write!(f, "{m}"),
        }
    }
}

impl From<PrepError> for CliError {
    fn from(e: PrepError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RateConfigError> for CliError {
    fn from(e: RateConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ProviderError> for CliError {
    fn from(e: ProviderError) -> Self {
        CliError::Provider(e.to_string())
    }
}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AlignError> for CliError {
    fn from(e: AlignError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<TsvError> for CliError {
    fn from(e: TsvError) -> Self {
        match e {
            TsvError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::Provider(p) => p.into(),
            EmbedError::Cache(c) => c.into(),
            EmbedError::Matrix(m) => m.into(),
            EmbedError::RateConfig(r) => r.into(),
            other @ EmbedError::CachedDimension { .. } => CliError::Validation(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Embed(inner) => inner.into(),
            PipelineError::Align(inner) => inner.into(),
            PipelineError::Eval(inner) => inner.into(),
            other @ PipelineError::RowCountMismatch { .. } => {
                CliError::Validation(other.to_string())
            }
        }
    }
}
