use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: not valid UTF-8", path.display())]
    InvalidUtf8 { path: PathBuf },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid document id {0:?}")]
    InvalidId(String),

    #[error("duplicate document id {0}")]
    DuplicateId(String),

    #[error("unknown document {0}")]
    UnknownDocument(String),

    #[error("self-loop citation {0} -> {0}")]
    SelfLoop(String),

    #[error("similarity requested for identical pair ({0}, {0})")]
    IdenticalPair(String),

    #[error("no embedding for {0}")]
    MissingVector(String),

    #[error("zero-norm vector for {0}")]
    ZeroVector(String),

    #[error("document {0} has no paragraphs")]
    NoParagraphs(String),

    #[error("document {0} has no in-vocabulary tokens")]
    OutOfVocabulary(String),

    #[error("no shared rhetorical roles between {0} and {1}")]
    NoSharedRoles(String, String),

    #[error("no segment annotation for {0}")]
    MissingSegments(String),

    #[error("empty document {0}")]
    EmptyDocument(String),

    #[error("nothing to train on: {0}")]
    EmptyTraining(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("method {0} could not score any pair")]
    NoScorablePairs(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Stable short code, used by the CLI for machine-parsable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::InvalidUtf8 { .. } => "utf8",
            Error::Parse { .. } => "parse",
            Error::InvalidId(_) => "invalid-id",
            Error::DuplicateId(_) => "duplicate-id",
            Error::UnknownDocument(_) => "unknown-document",
            Error::SelfLoop(_) => "self-loop",
            Error::IdenticalPair(_) => "identical-pair",
            Error::MissingVector(_) => "missing-vector",
            Error::ZeroVector(_) => "zero-vector",
            Error::NoParagraphs(_) => "no-paragraphs",
            Error::OutOfVocabulary(_) => "out-of-vocabulary",
            Error::NoSharedRoles(..) => "no-shared-roles",
            Error::MissingSegments(_) => "missing-segments",
            Error::EmptyDocument(_) => "empty-document",
            Error::EmptyTraining(_) => "empty-training",
            Error::Config(_) => "config",
            Error::Invalid(_) => "invalid",
            Error::NoScorablePairs(_) => "no-scorable-pairs",
        }
    }
}
