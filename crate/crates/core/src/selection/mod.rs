//! Sentence selection: features, negative sampling, training and ranking.

mod features;
mod model;
mod negatives;
mod ranking;
mod training;

pub use features::{extract_features, schema_hash, Candidate, ClaimProfile, FeatureVector, SELECTION_FEATURES};
pub use model::{RelevanceModel, RelevanceScorer, TrainingMetadata, RELEVANCE_MODEL_SCHEMA};
pub use negatives::{sample_negatives, NegativeGroups, NegativeSampler};
pub use ranking::{aggregate_sr, candidate_text, select_sentences, RankedEvidence};
pub use training::{train_selector, TrainingConfig, TrainingRegime, TrainingSet};
