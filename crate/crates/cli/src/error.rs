use std::path::PathBuf;

use emostock::corpus::CorpusError;
use emostock::investors::InvestorError;
use emostock::market::MarketError;
use emostock::models::ModelError;
use emostock::series::SeriesError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing artifact `{name}` at {}{}", path.display(), hint.as_deref().map(|h| format!("; run `emostock {h}` first")).unwrap_or_default())]
    MissingArtifact {
        name: String,
        path: PathBuf,
        hint: Option<String>,
    },
    #[error("data validation error: {0}")]
    Data(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingArtifact { .. } => 3,
            CliError::Data(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(source) => CliError::io("corpus", source),
            CorpusError::BadAlpha(_) | CorpusError::Keywords(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MarketError> for CliError {
    fn from(e: MarketError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<InvestorError> for CliError {
    fn from(e: InvestorError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Io(source) => CliError::io("model file", source),
            ModelError::Spec(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
