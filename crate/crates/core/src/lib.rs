//! Fact verification over a local Wikipedia-style corpus.
//!
//! The pipeline retrieves candidate pages for a claim, ranks their sentences
//! with a trainable relevance model, and labels the claim from the top
//! evidence. Around it sit an adversarial claim generator (swap a claim's
//! second entity for a knowledge-base sibling), contingency-table analysis of
//! entity relatedness, and the evaluation harness.
//!
//! Numeric kernels are generic over [`Scalar`]; the aliases below fix them to
//! `f64`, which is what the pipeline and the CLI use.

pub mod claim_gen;
pub mod claims;
pub mod corpus;
pub mod doc_retrieval;
pub mod entity_analysis;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod fixture;
pub mod index;
pub mod jsonl;
pub mod kb;
pub mod linear;
pub mod nli;
pub mod records;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod text;

pub use claims::{Claim, Label};
pub use corpus::{ingest_corpus, Corpus, Document, SentenceId};
pub use error::{Error, Result};
pub use index::{build_index, tfidf_rank, Granularity, InvertedIndex};
pub use kb::{EntityRecord, KnowledgeBase};
pub use scalar::Scalar;

pub type RelevanceModel = selection::RelevanceModel<f64>;
pub type NliModel = nli::NliModel<f64>;
pub type FeatureVector = selection::FeatureVector<f64>;
pub type ChiSquaredResult = entity_analysis::ChiSquared<f64>;

pub type RelevanceModelF32 = selection::RelevanceModel<f32>;
pub type NliModelF32 = nli::NliModel<f32>;
