use crate::span::Span;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{span}: parse error: {message}")]
    Parse {
        span: Span,
        message: String,
        expected: Vec<String>,
    },
    #[error("{span}: type error: {message}")]
    Type { span: Span, message: String },
    #[error("{span}: unsupported feature: {construct}")]
    Unsupported { span: Span, construct: String },
    #[error("{span}: indefinite sort: {message}")]
    IndefiniteSort {
        span: Span,
        message: String,
        /// Groups of top-level signatures that would have to share a sort.
        merge: Vec<Vec<String>>,
    },
    #[error("scope error: {message}")]
    Scope { span: Option<Span>, message: String },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("cannot read solver model: {0}")]
    ModelParse(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(span: Span, message: impl Into<String>) -> Self {
        Error::Parse { span, message: message.into(), expected: Vec::new() }
    }

    pub fn unsupported(span: Span, construct: impl Into<String>) -> Self {
        Error::Unsupported { span, construct: construct.into() }
    }

    pub fn type_error(span: Span, message: impl Into<String>) -> Self {
        Error::Type { span, message: message.into() }
    }

    pub fn scope(message: impl Into<String>) -> Self {
        Error::Scope { span: None, message: message.into() }
    }

    /// Source location attached to the error, if any.
    pub fn span(&self) -> Option<Span> {
        match self {
            Error::Parse { span, .. }
            | Error::Type { span, .. }
            | Error::Unsupported { span, .. }
            | Error::IndefiniteSort { span, .. } => Some(*span),
            Error::Scope { span, .. } => *span,
            _ => None,
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unsupported { .. } => 2,
            Error::IndefiniteSort { .. } | Error::Scope { .. } => 3,
            Error::Parse { .. } | Error::Type { .. } | Error::NotFound(_) => 4,
            Error::Solver(_) | Error::ModelParse(_) => 6,
            Error::Resource(_) => 7,
            Error::Eval(_) | Error::Io(_) => 10,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
