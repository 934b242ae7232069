//! Selector training with per-epoch hardest-negative balancing.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::{Candidate, ClaimProfile, FeatureVector};
use super::model::{RelevanceModel, TrainingMetadata};
use super::negatives::NegativeSampler;
use crate::claim_gen::SyntheticClaim;
use crate::claims::{Claim, Label};
use crate::corpus::{Corpus, SentenceId};
use crate::error::{Error, Result};
use crate::index::InvertedIndex;
use crate::linear::Logistic;
use crate::rng::{derive_seed, seeded};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingRegime {
    Baseline,
    #[serde(rename = "sup")]
    SupOnly,
    #[serde(rename = "ref")]
    RefOnly,
    #[serde(rename = "da")]
    DataAugmented,
}

impl TrainingRegime {
    pub const ALL: [TrainingRegime; 4] = [
        TrainingRegime::Baseline,
        TrainingRegime::SupOnly,
        TrainingRegime::RefOnly,
        TrainingRegime::DataAugmented,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrainingRegime::Baseline => "baseline",
            TrainingRegime::SupOnly => "sup",
            TrainingRegime::RefOnly => "ref",
            TrainingRegime::DataAugmented => "da",
        }
    }

    /// Training claims admitted by this regime, in input order.
    pub fn select(self, claims: &[Claim], synthetic: &[SyntheticClaim]) -> Vec<Claim> {
        let keep = |l: Label| match self {
            TrainingRegime::Baseline | TrainingRegime::DataAugmented => l.is_verifiable(),
            TrainingRegime::SupOnly => l == Label::Supported,
            TrainingRegime::RefOnly => l == Label::Refuted,
        };
        let mut out: Vec<Claim> = claims.iter().filter(|c| keep(c.label)).cloned().collect();
        if self == TrainingRegime::DataAugmented {
            out.extend(synthetic.iter().map(SyntheticClaim::to_claim));
        }
        out
    }
}

impl fmt::Display for TrainingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrainingRegime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(TrainingRegime::Baseline),
            "sup" => Ok(TrainingRegime::SupOnly),
            "ref" => Ok(TrainingRegime::RefOnly),
            "da" => Ok(TrainingRegime::DataAugmented),
            other => Err(format!("unknown regime {other:?} (expected baseline|sup|ref|da)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: u32,
    pub learning_rate: f64,
    pub seed: u64,
    pub negatives_per_positive: usize,
}

impl TrainingConfig {
    /// Learning rate used for the transformer selector this model stands in for.
    pub const REFERENCE_LEARNING_RATE: f64 = 2.5e-6;

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.negatives_per_positive == 0 {
            return Err(Error::Config("negatives per positive must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 2,
            learning_rate: 0.1,
            seed: 0,
            negatives_per_positive: 15,
        }
    }
}

/// Featurized positives and the full negative pool.
#[derive(Debug, Clone)]
pub struct TrainingSet<T> {
    pub claims: usize,
    pub positives: Vec<FeatureVector<T>>,
    pub negatives: Vec<FeatureVector<T>>,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn build(claims: &[Claim], corpus: &Corpus, sentence_index: &InvertedIndex, per_positive: usize) -> Self {
        let sampler = NegativeSampler::new(per_positive);
        let mut set = TrainingSet {
            claims: 0,
            positives: Vec::new(),
            negatives: Vec::new(),
        };
        for claim in claims.iter().filter(|c| c.is_verifiable()) {
            let positives: Vec<SentenceId> = claim
                .gold_sentences()
                .into_iter()
                .filter(|id| corpus.get_sentence(id).is_some_and(|t| !t.trim().is_empty()))
                .collect();
            if positives.is_empty() {
                continue;
            }
            set.claims += 1;
            let profile = ClaimProfile::new(&claim.text, sentence_index);
            let featurize = |id: &SentenceId| {
                let cand = Candidate::resolve(corpus, id).expect("sampled ids come from the corpus");
                profile.features::<T>(&cand, sentence_index)
            };
            set.positives.extend(positives.iter().map(featurize));
            for groups in sampler.sample(&claim.text, &positives, sentence_index) {
                set.negatives.extend(groups.iter().map(featurize));
            }
        }
        set
    }

    /// Indices of the `min(|positives|, |negatives|)` highest-scoring negatives.
    pub fn hardest_negatives(&self, model: &Logistic<T>) -> Vec<usize> {
        let mut scored: Vec<(usize, T)> = self
            .negatives
            .iter()
            .enumerate()
            .map(|(i, f)| (i, model.probability(f.as_slice())))
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        scored.truncate(self.positives.len().min(self.negatives.len()));
        scored.into_iter().map(|(i, _)| i).collect()
    }

    fn balanced(&self, hardest: &[usize]) -> Vec<(&[T], T)> {
        self.positives
            .iter()
            .map(|f| (f.as_slice(), T::one()))
            .chain(hardest.iter().map(|&i| (self.negatives[i].as_slice(), T::zero())))
            .collect()
    }

    /// Gradient descent with the hardest negatives refreshed every epoch.
    /// Returns the model and the loss before training and after each epoch.
    pub fn fit(&self, config: &TrainingConfig) -> (Logistic<T>, Vec<f64>) {
        let dim = self
            .positives
            .first()
            .map_or(super::SELECTION_FEATURES.len(), FeatureVector::len);
        let mut model = Logistic::zeros(dim);
        let lr = T::of(config.learning_rate);
        let mut history = vec![model.loss(self.balanced(&self.hardest_negatives(&model))).as_f64()];
        for epoch in 0..config.epochs {
            let hardest = self.hardest_negatives(&model);
            let mut examples = self.balanced(&hardest);
            examples.shuffle(&mut seeded(derive_seed(config.seed, u64::from(epoch))));
            for (x, y) in &examples {
                model.step(x, *y, lr);
            }
            history.push(model.loss(examples.iter().copied()).as_f64());
        }
        (model, history)
    }
}

pub fn train_selector<T: Scalar>(
    claims: &[Claim],
    synthetic: &[SyntheticClaim],
    corpus: &Corpus,
    sentence_index: &InvertedIndex,
    regime: TrainingRegime,
    config: &TrainingConfig,
) -> Result<RelevanceModel<T>> {
    config.validate()?;
    let selected = regime.select(claims, synthetic);
    let set = TrainingSet::<T>::build(&selected, corpus, sentence_index, config.negatives_per_positive);
    if set.positives.is_empty() {
        return Err(Error::EmptyRegime(regime.to_string()));
    }
    let (linear, loss_history) = set.fit(config);
    Ok(RelevanceModel {
        linear,
        metadata: TrainingMetadata {
            regime: regime.to_string(),
            seed: config.seed,
            epochs: config.epochs,
            learning_rate: config.learning_rate,
            negatives_per_positive: config.negatives_per_positive,
            claims: set.claims,
            positives: set.positives.len(),
            negative_pool: set.negatives.len(),
            loss_history,
        },
    })
}
