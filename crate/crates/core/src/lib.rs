//! Detection of sarcasm carried by numbers in short texts.
//!
//! The crate covers the whole pipeline: corpus cleaning and hashtag labels,
//! a lightweight NLP front end (tokenizer, tagger, noun-phrase chunker,
//! numeric mention extraction), repository-based rule cascades, feature
//! engineering with classical classifiers, and three small neural text
//! models trained with a built-in reverse-mode differentiator.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the CLI uses.

pub mod classic;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod features;
pub mod neural;
pub mod rulebase;
pub mod scalar;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
pub use scalar::Real;

pub type EmbeddingTable64 = embeddings::EmbeddingTable<f64>;
pub type RuleModel64 = rulebase::RuleModel<f64>;
pub type ClassicModel64 = classic::ClassicModel<f64>;
pub type Model64 = neural::Model<f64>;
pub type Checkpoint64 = neural::Checkpoint<f64>;
