//! The relevance model and its versioned JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{schema_hash, Candidate, ClaimProfile, FeatureVector, SELECTION_FEATURES};
use crate::error::{Error, Result};
use crate::index::InvertedIndex;
use crate::jsonl;
use crate::linear::Logistic;
use crate::scalar::Scalar;

pub const RELEVANCE_MODEL_SCHEMA: &str = "factcheck.relevance-model/1";

/// Anything that can score a candidate sentence for a claim.
pub trait RelevanceScorer {
    /// Relevance probability in `(0, 1)`.
    fn relevance(&self, claim: &ClaimProfile, candidate: &Candidate, stats: &InvertedIndex) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub regime: String,
    pub seed: u64,
    pub epochs: u32,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub claims: usize,
    pub positives: usize,
    pub negative_pool: usize,
    /// Balanced-set loss before training, then after each epoch.
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceModel<T> {
    pub linear: Logistic<T>,
    pub metadata: TrainingMetadata,
}

impl<T: Scalar> RelevanceModel<T> {
    pub fn score(&self, features: &FeatureVector<T>) -> T {
        self.linear.probability(features.as_slice())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_json(
            path,
            &ModelFile {
                schema: RELEVANCE_MODEL_SCHEMA.to_string(),
                feature_schema_hash: schema_hash(&SELECTION_FEATURES),
                feature_names: SELECTION_FEATURES.iter().map(|s| s.to_string()).collect(),
                weights: self.linear.weights.clone(),
                bias: self.linear.bias,
                metadata: self.metadata.clone(),
            },
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ModelFile<T> = jsonl::read_json(path)?;
        if file.schema != RELEVANCE_MODEL_SCHEMA {
            return Err(Error::Model(format!("unsupported schema {:?}", file.schema)));
        }
        if file.feature_schema_hash != schema_hash(&SELECTION_FEATURES)
            || file.weights.len() != SELECTION_FEATURES.len()
        {
            return Err(Error::Model("feature schema mismatch".into()));
        }
        let linear = Logistic {
            weights: file.weights,
            bias: file.bias,
        };
        if !linear.is_finite() {
            return Err(Error::Model("non-finite weights".into()));
        }
        Ok(RelevanceModel {
            linear,
            metadata: file.metadata,
        })
    }
}

impl<T: Scalar> RelevanceScorer for RelevanceModel<T> {
    fn relevance(&self, claim: &ClaimProfile, candidate: &Candidate, stats: &InvertedIndex) -> f64 {
        self.score(&claim.features(candidate, stats)).as_f64()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelFile<T> {
    schema: String,
    feature_schema_hash: String,
    feature_names: Vec<String>,
    weights: Vec<T>,
    bias: T,
    metadata: TrainingMetadata,
}
