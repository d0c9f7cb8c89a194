use std::fmt;

use mofname::corpus::CorpusError;
use mofname::embedding::{EmbeddingError, StoreError};
use mofname::predict::PredictError;
use mofname::screen::ScreenError;
use mofname::simspace::SimError;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_REMOTE: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::data(format!("{}: {e}", path.display()))
    }

    /// `{"error": …}` line for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        let code = match e {
            EmbeddingError::Config(_) => EXIT_USAGE,
            EmbeddingError::Remote(_) => EXIT_REMOTE,
            EmbeddingError::Store(_) => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<PredictError> for CliError {
    fn from(e: PredictError) -> Self {
        match e {
            PredictError::Embedding(inner) => inner.into(),
            PredictError::Config(_) => Self::usage(e.to_string()),
            other => Self::data(other.to_string()),
        }
    }
}

impl From<ScreenError> for CliError {
    fn from(e: ScreenError) -> Self {
        match e {
            ScreenError::Config(_) => Self::usage(e.to_string()),
            other => Self::data(other.to_string()),
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        Self::data(e.to_string())
    }
}
