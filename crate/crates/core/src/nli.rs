//! Three-way claim/evidence classification and majority-vote verdicts.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::claims::{Claim, Label};
use crate::corpus::{Corpus, SentenceId};
use crate::error::{Error, Result};
use crate::index::InvertedIndex;
use crate::jsonl;
use crate::linear::Softmax;
use crate::rng::{derive_seed, seeded};
use crate::scalar::Scalar;
use crate::selection::{schema_hash, Candidate, ClaimProfile, FeatureVector, RankedEvidence, SELECTION_FEATURES};
use crate::text::{raw_tokens, tokenize};

pub type VerdictLabel = Label;

pub const NLI_MODEL_SCHEMA: &str = "factcheck.nli-model/1";

/// Tie-break precedence, highest first.
pub const TIE_BREAK_ORDER: [Label; 3] = [Label::NotEnoughInfo, Label::Supported, Label::Refuted];

const NEGATION_CUES: [&str; 4] = ["not", "only", "never", "no"];

pub fn pair_feature_names() -> Vec<&'static str> {
    let mut names = SELECTION_FEATURES.to_vec();
    names.extend(["negation_mismatch", "numeral_mismatch", "evidence_tokens_missing"]);
    names
}

fn has_negation(text: &str) -> bool {
    let lower = text.to_lowercase();
    lower.contains("n't")
        || lower.contains("n\u{2019}t")
        || tokenize(text).iter().any(|t| NEGATION_CUES.contains(&t.as_str()))
}

fn numerals(text: &str) -> HashSet<&str> {
    raw_tokens(text)
        .map(|(_, t)| t)
        .filter(|t| t.chars().all(|c| c.is_ascii_digit()))
        .collect()
}

/// Selection features followed by negation mismatch, numeral mismatch and the
/// fraction of evidence tokens absent from the claim.
pub fn extract_pair_features<T: Scalar>(
    claim: &ClaimProfile,
    evidence: &Candidate,
    stats: &InvertedIndex,
) -> FeatureVector<T> {
    let mut f = claim.raw_features(evidence, stats);
    let evidence_text = evidence.text();
    f.push(f64::from(u8::from(
        has_negation(&claim.text) != has_negation(&evidence.body),
    )));
    let (cn, en) = (numerals(&claim.text), numerals(&evidence.body));
    f.push(f64::from(u8::from(!cn.is_empty() && !en.is_empty() && cn != en)));
    let claim_set: HashSet<&str> = claim.tokens.iter().map(String::as_str).collect();
    let ev_tokens = tokenize(&evidence_text);
    let missing = ev_tokens.iter().filter(|t| !claim_set.contains(t.as_str())).count();
    f.push(if ev_tokens.is_empty() {
        0.0
    } else {
        missing as f64 / ev_tokens.len() as f64
    });
    FeatureVector(f.into_iter().map(T::of).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NliConfig {
    pub epochs: u32,
    pub learning_rate: f64,
    pub seed: u64,
    /// Retrieved sentences paired with each NEI claim.
    pub nei_sentences: usize,
}

impl Default for NliConfig {
    fn default() -> Self {
        NliConfig {
            epochs: 10,
            learning_rate: 0.1,
            seed: 0,
            nei_sentences: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliMetadata {
    pub seed: u64,
    pub epochs: u32,
    pub learning_rate: f64,
    /// Pair counts in SUPPORTS, REFUTES, NOT ENOUGH INFO order.
    pub pairs_per_class: [usize; 3],
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NliModel<T> {
    pub linear: Softmax<T>,
    pub metadata: NliMetadata,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct NliFile<T> {
    schema: String,
    feature_schema_hash: String,
    feature_names: Vec<String>,
    classes: Vec<Label>,
    weights: Vec<Vec<T>>,
    biases: Vec<T>,
    metadata: NliMetadata,
}

impl<T: Scalar> NliModel<T> {
    /// Class probabilities in SUPPORTS, REFUTES, NOT ENOUGH INFO order.
    pub fn probabilities(&self, features: &FeatureVector<T>) -> [T; 3] {
        let p = self.linear.probabilities(features.as_slice());
        [p[0], p[1], p[2]]
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let names = pair_feature_names();
        jsonl::write_json(
            path,
            &NliFile {
                schema: NLI_MODEL_SCHEMA.into(),
                feature_schema_hash: schema_hash(&names),
                feature_names: names.iter().map(|s| s.to_string()).collect(),
                classes: Label::ALL.to_vec(),
                weights: self.linear.weights.clone(),
                biases: self.linear.biases.clone(),
                metadata: self.metadata.clone(),
            },
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: NliFile<T> = jsonl::read_json(path)?;
        if file.schema != NLI_MODEL_SCHEMA {
            return Err(Error::Model(format!("unsupported schema {:?}", file.schema)));
        }
        let names = pair_feature_names();
        if file.feature_schema_hash != schema_hash(&names)
            || file.classes != Label::ALL
            || file.weights.len() != 3
            || file.weights.iter().any(|w| w.len() != names.len())
            || file.biases.len() != 3
        {
            return Err(Error::Model("feature or class schema mismatch".into()));
        }
        Ok(NliModel {
            linear: Softmax {
                weights: file.weights,
                biases: file.biases,
            },
            metadata: file.metadata,
        })
    }
}

/// Featurized training pairs per the labelling rule: gold sentences carry the
/// claim's label, NEI claims pair with their top retrieved sentences.
pub fn nli_training_pairs<T: Scalar>(
    claims: &[Claim],
    selections: &BTreeMap<u64, RankedEvidence>,
    corpus: &Corpus,
    stats: &InvertedIndex,
    nei_sentences: usize,
) -> Vec<(FeatureVector<T>, Label)> {
    let mut pairs = Vec::new();
    for claim in claims {
        let ids: Vec<SentenceId> = match claim.label {
            Label::NotEnoughInfo => selections
                .get(&claim.id)
                .map(|r| r.ids().take(nei_sentences).cloned().collect())
                .unwrap_or_default(),
            _ => claim.gold_sentences(),
        };
        let profile = ClaimProfile::new(&claim.text, stats);
        for id in ids {
            match Candidate::resolve(corpus, &id) {
                Ok(cand) if !cand.body.trim().is_empty() => {
                    pairs.push((extract_pair_features(&profile, &cand, stats), claim.label));
                }
                _ => log::warn!("claim {}: skipping unresolvable sentence {id}", claim.id),
            }
        }
    }
    pairs
}

pub fn train_nli<T: Scalar>(
    claims: &[Claim],
    selections: &BTreeMap<u64, RankedEvidence>,
    corpus: &Corpus,
    stats: &InvertedIndex,
    config: &NliConfig,
) -> Result<NliModel<T>> {
    let pairs = nli_training_pairs::<T>(claims, selections, corpus, stats, config.nei_sentences);
    fit_nli(&pairs, config)
}

/// Softmax regression over labelled pairs; every class must be present.
pub fn fit_nli<T: Scalar>(pairs: &[(FeatureVector<T>, Label)], config: &NliConfig) -> Result<NliModel<T>> {
    let mut counts = [0usize; 3];
    for (_, l) in pairs {
        counts[l.index()] += 1;
    }
    for l in Label::ALL {
        if counts[l.index()] == 0 {
            return Err(Error::MissingClass(l.to_string()));
        }
    }
    let dim = pairs[0].0.len();
    let mut linear = Softmax::zeros(3, dim);
    let examples: Vec<(&[T], usize)> = pairs.iter().map(|(f, l)| (f.as_slice(), l.index())).collect();
    let mut history = vec![linear.loss(examples.iter().copied()).as_f64()];
    let lr = T::of(config.learning_rate);
    let mut order = examples.clone();
    for epoch in 0..config.epochs {
        order.shuffle(&mut seeded(derive_seed(config.seed, u64::from(epoch))));
        for (x, c) in &order {
            linear.step(x, *c, lr);
        }
        history.push(linear.loss(examples.iter().copied()).as_f64());
    }
    Ok(NliModel {
        linear,
        metadata: NliMetadata {
            seed: config.seed,
            epochs: config.epochs,
            learning_rate: config.learning_rate,
            pairs_per_class: counts,
            loss_history: history,
        },
    })
}

/// Argmax label over probabilities given in SUPPORTS, REFUTES, NEI order;
/// exact ties resolve by [`TIE_BREAK_ORDER`].
pub fn argmax_label<T: Scalar>(probabilities: &[T; 3]) -> Label {
    let mut best = TIE_BREAK_ORDER[0];
    for &l in &TIE_BREAK_ORDER[1..] {
        if probabilities[l.index()] > probabilities[best.index()] {
            best = l;
        }
    }
    best
}

pub fn classify_pair<T: Scalar>(
    model: &NliModel<T>,
    claim: &ClaimProfile,
    evidence: &Candidate,
    stats: &InvertedIndex,
) -> (Label, [T; 3]) {
    let p = model.probabilities(&extract_pair_features(claim, evidence, stats));
    (argmax_label(&p), p)
}

/// Majority vote; ties go to the earliest label in [`TIE_BREAK_ORDER`].
/// No evidence means not enough info.
pub fn aggregate_verdict(labels: &[Label]) -> Label {
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    let mut best = TIE_BREAK_ORDER[0];
    for &l in &TIE_BREAK_ORDER[1..] {
        if counts[l.index()] > counts[best.index()] {
            best = l;
        }
    }
    best
}

/// Verdict for one claim from its ranked evidence (top `k` pairs vote).
pub fn verdict_for<T: Scalar>(
    model: &NliModel<T>,
    claim_text: &str,
    evidence: &RankedEvidence,
    corpus: &Corpus,
    stats: &InvertedIndex,
    k: usize,
) -> Label {
    let profile = ClaimProfile::new(claim_text, stats);
    let labels: Vec<Label> = evidence
        .ids()
        .take(k)
        .filter_map(|id| Candidate::resolve(corpus, id).ok())
        .map(|cand| classify_pair(model, &profile, &cand, stats).0)
        .collect();
    aggregate_verdict(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::index::{build_index, Granularity};
    use Label::{NotEnoughInfo as Nei, Refuted as Ref, Supported as Sup};

    fn stats() -> InvertedIndex {
        let corpus = Corpus::from_documents([Document::from_texts(
            "Stan Beeman",
            &["Stan Beeman acts in a US TV series."],
        )])
        .unwrap();
        build_index(&corpus, Granularity::Sentence).unwrap()
    }

    #[test]
    fn vote_examples() {
        assert_eq!(aggregate_verdict(&[Sup, Sup, Ref, Ref, Nei]), Sup);
        assert_eq!(aggregate_verdict(&[Ref, Ref, Ref, Sup, Sup]), Ref);
        assert_eq!(aggregate_verdict(&[Nei, Nei, Sup, Sup, Ref]), Nei);
        assert_eq!(aggregate_verdict(&[]), Nei);
    }

    #[test]
    fn argmax_and_ties() {
        assert_eq!(argmax_label(&[0.5, 0.3, 0.2]), Sup);
        assert_eq!(argmax_label(&[1.0f64 / 3.0; 3]), Nei);
        assert_eq!(argmax_label(&[0.4, 0.4, 0.2]), Sup);
    }

    #[test]
    fn zero_model_predicts_nei() {
        let model = NliModel::<f64> {
            linear: Softmax::zeros(3, pair_feature_names().len()),
            metadata: NliMetadata {
                seed: 0,
                epochs: 0,
                learning_rate: 0.1,
                pairs_per_class: [0; 3],
                loss_history: vec![],
            },
        };
        let stats = stats();
        let claim = ClaimProfile::new("anything", &stats);
        let (label, p) = classify_pair(&model, &claim, &Candidate::new("T", "body", 0.0), &stats);
        assert_eq!(label, Nei);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negation_and_numeral_cues() {
        let stats = stats();
        let claim = ClaimProfile::new("Stan Beeman is only in shows on BBC.", &stats);
        let f = extract_pair_features::<f64>(
            &claim,
            &Candidate::new("Stan Beeman", "Stan Beeman acts in a US TV series.", 0.0),
            &stats,
        );
        assert_eq!(f.len(), 13);
        assert_eq!(f.0[10], 1.0);

        let same = "Film X was released in 1990 and isn't long.";
        let profile = ClaimProfile::new(same, &stats);
        let f = extract_pair_features::<f64>(&profile, &Candidate::new("", same, 0.0), &stats);
        assert_eq!((f.0[10], f.0[11]), (0.0, 0.0));

        let g = extract_pair_features::<f64>(
            &profile,
            &Candidate::new("", "Film X was released in 1991.", 0.0),
            &stats,
        );
        assert_eq!(g.0[11], 1.0);
    }

    #[test]
    fn evidence_inside_claim_has_no_extra_tokens() {
        let stats = stats();
        let claim = ClaimProfile::new("Stan Beeman acts in a US TV series.", &stats);
        let f = extract_pair_features::<f64>(&claim, &Candidate::new("Stan Beeman", "acts in a series", 0.1), &stats);
        assert_eq!(f.0[12], 0.0);
    }

    #[test]
    fn missing_class_is_an_error() {
        let pairs = vec![(FeatureVector(vec![1.0f64]), Sup), (FeatureVector(vec![0.0f64]), Ref)];
        assert!(
            matches!(fit_nli(&pairs, &NliConfig::default()), Err(Error::MissingClass(c)) if c == "NOT ENOUGH INFO")
        );
    }

    #[test]
    fn separable_pairs_are_learned() {
        let mut pairs = Vec::new();
        for i in 0..10 {
            let j = i as f64 * 0.01;
            pairs.push((FeatureVector(vec![1.0 + j, 0.0, 0.0]), Sup));
            pairs.push((FeatureVector(vec![0.0, 1.0 + j, 0.0]), Ref));
            pairs.push((FeatureVector(vec![0.0, 0.0, 1.0 + j]), Nei));
        }
        let config = NliConfig {
            epochs: 30,
            learning_rate: 0.5,
            ..Default::default()
        };
        let model = fit_nli(&pairs, &config).unwrap();
        let h = &model.metadata.loss_history;
        assert!(h.last().unwrap() < &h[0]);
        for (f, l) in &pairs {
            assert_eq!(argmax_label(&model.probabilities(f)), *l);
        }
        assert_eq!(model, fit_nli(&pairs, &config).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn label() -> impl Strategy<Value = Label> {
            prop_oneof![Just(Sup), Just(Ref), Just(Nei)]
        }

        proptest! {
            #[test]
            fn vote_ignores_order(mut labels in proptest::collection::vec(label(), 1..6), seed in any::<u64>()) {
                let before = aggregate_verdict(&labels);
                labels.shuffle(&mut seeded(seed));
                prop_assert_eq!(before, aggregate_verdict(&labels));
            }

            #[test]
            fn strict_majority_wins(winner in label(), others in proptest::collection::vec(label(), 0..2)) {
                let mut labels = vec![winner; others.len() + 1];
                labels.extend(others.iter().copied());
                prop_assert_eq!(aggregate_verdict(&labels), winner);
            }

            #[test]
            fn probabilities_sum_to_one(w in proptest::collection::vec(-3.0f64..3.0, 39), x in proptest::collection::vec(0.0f64..2.0, 13)) {
                let model = NliModel {
                    linear: Softmax { weights: w.chunks(13).map(|c| c.to_vec()).collect(), biases: vec![0.1, -0.2, 0.0] },
                    metadata: NliMetadata { seed: 0, epochs: 0, learning_rate: 0.0, pairs_per_class: [0; 3], loss_history: vec![] },
                };
                let p = model.probabilities(&FeatureVector(x));
                prop_assert!(p.iter().all(|&v| v > 0.0));
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}
