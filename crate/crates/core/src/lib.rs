//! API knowledge graph construction, embedding and analogical API
//! recommendation.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, with `*32` variants for single precision.

pub mod concepts;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod functionality;
pub mod graph;
pub mod index;
pub mod ingest;
pub mod lexicon;
pub mod linkpred;
pub mod pipeline;
pub mod recommend;
pub mod scalar;
pub mod text;
pub mod train;

pub use embedding::{EmbeddingModel, ModelKind};
pub use error::{Error, Result};
pub use graph::{Direction, Entity, EntityId, EntityKind, KnowledgeGraph, RelationKind, Triple};
pub use index::{IndexFilter, VectorIndex};
pub use lexicon::Lexicons;
pub use pipeline::{build_graph, BuildReport};
pub use recommend::{Recommender, Scope};
pub use scalar::Scalar;
pub use train::{train, TrainConfig, TrainOutcome};

pub type Model = EmbeddingModel<f64>;
pub type Model32 = EmbeddingModel<f32>;
pub type Index = VectorIndex<f64>;
pub type Index32 = VectorIndex<f32>;
pub type Weights = recommend::Weights<f64>;
pub type Recommendation = recommend::Recommendation<f64>;
