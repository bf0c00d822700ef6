use thiserror::Error;

use crate::graph::{EntityId, EntityKind, RelationKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entity name must not be empty ({0:?})")]
    EmptyName(EntityKind),

    #[error("entity name {0:?} contains a tab or line break")]
    InvalidName(String),

    #[error("{kind:?} entities {requirement}")]
    LibraryMismatch {
        kind: EntityKind,
        requirement: &'static str,
    },

    #[error("unknown entity id {0}")]
    UnknownEntity(EntityId),

    #[error("{rel:?} does not allow {side} of kind {found:?}")]
    KindConstraint {
        rel: RelationKind,
        side: &'static str,
        found: EntityKind,
    },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("corpus: {path}: {message}")]
    Schema { path: String, message: String },

    #[error("lexicon {file}: {message}")]
    Lexicon { file: String, message: String },

    #[error("no embedding for {0}")]
    MissingEmbedding(String),

    #[error("training diverged at epoch {epoch}, step {step}: loss = {loss}")]
    NonFiniteLoss { epoch: usize, step: usize, loss: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("vector error: {0}")]
    Vector(String),

    #[error("evaluation: {0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Short machine-parsable category used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::EmptyName(_)
            | Error::InvalidName(_)
            | Error::LibraryMismatch { .. }
            | Error::UnknownEntity(_)
            | Error::KindConstraint { .. } => "graph",
            Error::Format { .. } => "format",
            Error::Schema { .. } => "schema",
            Error::Lexicon { .. } => "lexicon",
            Error::MissingEmbedding(_) | Error::NonFiniteLoss { .. } => "model",
            Error::Config(_) => "config",
            Error::Vector(_) => "vector",
            Error::Eval(_) => "eval",
            Error::Io(_) => "io",
            Error::Stage { source, .. } => source.category(),
        }
    }
}
