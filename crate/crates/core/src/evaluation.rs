//! Retrieval and verification metrics.
//!
//! Two evidence criteria coexist. Recall and FEVER score use the strict
//! rule: some complete gold group lies inside the top `k`. Mistake counts
//! use the loose rule: a verifiable claim is a mistake when not a single
//! gold sentence (from any group) is in the top `k`.

use std::collections::{BTreeMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::claims::{Claim, Label};
use crate::corpus::SentenceId;
use crate::error::{Error, Result};

pub const RECALL_CRITERION: &str = "complete evidence group within top-k";
pub const MISTAKE_CRITERION: &str = "no gold evidence sentence within top-k";

/// Ranked evidence per claim id.
pub type Predictions = BTreeMap<u64, Vec<SentenceId>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    pub evidence: Vec<SentenceId>,
}

pub type Verdicts = BTreeMap<u64, Verdict>;

fn group_covered<K: Eq + Hash>(groups: &[Vec<K>], top: &HashSet<&K>) -> bool {
    groups
        .iter()
        .any(|g| !g.is_empty() && g.iter().all(|s| top.contains(s)))
}

fn any_hit<K: Eq + Hash>(groups: &[Vec<K>], top: &HashSet<&K>) -> bool {
    groups.iter().flatten().any(|s| top.contains(s))
}

fn check_ids<V>(predictions: &BTreeMap<u64, V>, claims: &[Claim]) -> Result<()> {
    let known: HashSet<u64> = claims.iter().map(|c| c.id).collect();
    match predictions.keys().find(|id| !known.contains(id)) {
        Some(&id) => Err(Error::UnknownClaim(id)),
        None => Ok(()),
    }
}

fn top_k<K>(ranked: Option<&Vec<K>>, k: usize) -> HashSet<&K>
where
    K: Eq + Hash,
{
    ranked.map(|r| r.iter().take(k).collect()).unwrap_or_default()
}

/// Per-claim outcome under both evidence criteria.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimOutcome {
    pub claim_id: u64,
    pub label: Label,
    pub covered: bool,
    pub mistake: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_label: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fever_correct: Option<bool>,
}

fn outcomes<K: Eq + Hash>(
    groups_of: impl Fn(&Claim) -> Vec<Vec<K>>,
    predictions: &BTreeMap<u64, Vec<K>>,
    claims: &[Claim],
    k: usize,
) -> Result<Vec<ClaimOutcome>> {
    check_ids(predictions, claims)?;
    let out: Vec<ClaimOutcome> = claims
        .iter()
        .filter(|c| c.is_verifiable())
        .map(|c| {
            let top = top_k(predictions.get(&c.id), k);
            let groups = groups_of(c);
            ClaimOutcome {
                claim_id: c.id,
                label: c.label,
                covered: group_covered(&groups, &top),
                mistake: !any_hit(&groups, &top),
                predicted_label: None,
                fever_correct: None,
            }
        })
        .collect();
    if out.is_empty() {
        return Err(Error::NoVerifiableClaims);
    }
    Ok(out)
}

fn sentence_outcomes(predictions: &Predictions, claims: &[Claim], k: usize) -> Result<Vec<ClaimOutcome>> {
    outcomes(|c| c.evidence.clone(), predictions, claims, k)
}

fn recall_of(outcomes: &[ClaimOutcome]) -> f64 {
    outcomes.iter().filter(|o| o.covered).count() as f64 / outcomes.len() as f64
}

fn mistakes_of(outcomes: &[ClaimOutcome]) -> (usize, usize) {
    let count = |l: Label| outcomes.iter().filter(|o| o.mistake && o.label == l).count();
    (count(Label::Refuted), count(Label::Supported))
}

pub fn recall_at_k(predictions: &Predictions, claims: &[Claim], k: usize) -> Result<f64> {
    sentence_outcomes(predictions, claims, k).map(|o| recall_of(&o))
}

/// `(refuted_mistakes, supported_mistakes)`.
pub fn count_mistakes(predictions: &Predictions, claims: &[Claim], k: usize) -> Result<(usize, usize)> {
    sentence_outcomes(predictions, claims, k).map(|o| mistakes_of(&o))
}

fn page_groups(c: &Claim) -> Vec<Vec<String>> {
    c.evidence
        .iter()
        .map(|g| {
            let mut pages: Vec<String> = g.iter().map(|s| s.page_id.clone()).collect();
            pages.dedup();
            pages
        })
        .collect()
}

/// Document-level recall: the pages of some evidence group are all retrieved.
pub fn doc_recall_at_k(predictions: &BTreeMap<u64, Vec<String>>, claims: &[Claim], k: usize) -> Result<f64> {
    outcomes(page_groups, predictions, claims, k).map(|o| recall_of(&o))
}

pub fn doc_mistakes(predictions: &BTreeMap<u64, Vec<String>>, claims: &[Claim], k: usize) -> Result<(usize, usize)> {
    outcomes(page_groups, predictions, claims, k).map(|o| mistakes_of(&o))
}

fn check_verdicts(verdicts: &Verdicts, claims: &[Claim]) -> Result<()> {
    check_ids(verdicts, claims)?;
    match claims.iter().find(|c| !verdicts.contains_key(&c.id)) {
        Some(c) => Err(Error::MissingVerdict(c.id)),
        None => Ok(()),
    }
}

fn fever_correct(claim: &Claim, verdict: &Verdict, k: usize) -> bool {
    if verdict.label != claim.label {
        return false;
    }
    if !claim.is_verifiable() {
        return true;
    }
    let top: HashSet<&SentenceId> = verdict.evidence.iter().take(k).collect();
    group_covered(&claim.evidence, &top)
}

/// Fraction of claims with the right label and, when verifiable, a complete
/// evidence group inside the first `k` predicted sentences.
pub fn fever_score(verdicts: &Verdicts, claims: &[Claim], k: usize) -> Result<f64> {
    check_verdicts(verdicts, claims)?;
    if claims.is_empty() {
        return Ok(0.0);
    }
    let hits = claims.iter().filter(|c| fever_correct(c, &verdicts[&c.id], k)).count();
    Ok(hits as f64 / claims.len() as f64)
}

pub fn label_accuracy(verdicts: &Verdicts, claims: &[Claim]) -> Result<f64> {
    check_verdicts(verdicts, claims)?;
    if claims.is_empty() {
        return Ok(0.0);
    }
    let hits = claims.iter().filter(|c| verdicts[&c.id].label == c.label).count();
    Ok(hits as f64 / claims.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub k: usize,
    pub recall_at_k: f64,
    pub recall_criterion: String,
    pub refuted_mistakes: usize,
    pub supported_mistakes: usize,
    pub mistake_criterion: String,
    pub verifiable_claims: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fever_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_accuracy: Option<f64>,
    pub claims: Vec<ClaimOutcome>,
}

/// Full report; verdict metrics are included when verdicts are given. The
/// FEVER score always uses the first five predicted sentences.
pub fn evaluate(
    predictions: &Predictions,
    verdicts: Option<&Verdicts>,
    claims: &[Claim],
    k: usize,
) -> Result<EvaluationReport> {
    let mut detail = sentence_outcomes(predictions, claims, k)?;
    let recall = recall_of(&detail);
    let (refuted_mistakes, supported_mistakes) = mistakes_of(&detail);
    let (fever, accuracy) = match verdicts {
        Some(v) => {
            let fs = fever_score(v, claims, 5)?;
            let la = label_accuracy(v, claims)?;
            for o in &mut detail {
                o.predicted_label = Some(v[&o.claim_id].label);
            }
            (Some(fs), Some(la))
        }
        None => (None, None),
    };
    if let Some(v) = verdicts {
        let by_id: BTreeMap<u64, &Claim> = claims.iter().map(|c| (c.id, c)).collect();
        for o in &mut detail {
            o.fever_correct = Some(fever_correct(by_id[&o.claim_id], &v[&o.claim_id], 5));
        }
    }
    Ok(EvaluationReport {
        k,
        recall_at_k: recall,
        recall_criterion: RECALL_CRITERION.into(),
        refuted_mistakes,
        supported_mistakes,
        mistake_criterion: MISTAKE_CRITERION.into(),
        verifiable_claims: detail.len(),
        fever_score: fever,
        label_accuracy: accuracy,
        claims: detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: &str, l: u32) -> SentenceId {
        SentenceId::new(p, l)
    }

    fn claim(id: u64, label: Label, evidence: Vec<Vec<SentenceId>>) -> Claim {
        Claim {
            id,
            label,
            text: String::new(),
            evidence,
        }
    }

    #[test]
    fn any_group_covers() {
        let claims = [claim(1, Label::Supported, vec![vec![s("A", 0)], vec![s("B", 2)]])];
        let preds = Predictions::from([(1, vec![s("X", 0), s("B", 2)])]);
        assert_eq!(recall_at_k(&preds, &claims, 5).unwrap(), 1.0);
    }

    #[test]
    fn partial_group_is_not_covered_but_not_a_mistake() {
        let claims = [claim(1, Label::Refuted, vec![vec![s("A", 0), s("A", 3)]])];
        let preds = Predictions::from([(1, vec![s("A", 0), s("Z", 1)])]);
        assert_eq!(recall_at_k(&preds, &claims, 5).unwrap(), 0.0);
        assert_eq!(count_mistakes(&preds, &claims, 5).unwrap(), (0, 0));
    }

    #[test]
    fn disjoint_refuted_is_a_refuted_mistake() {
        let claims = [
            claim(1, Label::Refuted, vec![vec![s("A", 0)]]),
            claim(2, Label::NotEnoughInfo, vec![]),
        ];
        let preds = Predictions::from([(1, vec![s("B", 0)]), (2, vec![s("C", 0)])]);
        assert_eq!(count_mistakes(&preds, &claims, 5).unwrap(), (1, 0));
    }

    #[test]
    fn degenerate_inputs() {
        let nei = [claim(1, Label::NotEnoughInfo, vec![])];
        assert!(matches!(
            recall_at_k(&Predictions::new(), &nei, 5),
            Err(Error::NoVerifiableClaims)
        ));
        let preds = Predictions::from([(9, vec![])]);
        assert!(matches!(recall_at_k(&preds, &nei, 5), Err(Error::UnknownClaim(9))));
        assert!(matches!(
            fever_score(&Verdicts::new(), &nei, 5),
            Err(Error::MissingVerdict(1))
        ));
    }

    #[test]
    fn fever_score_without_evidence_counts_only_nei() {
        let mut claims = Vec::new();
        for i in 0..9u64 {
            let label = [Label::Supported, Label::Refuted, Label::NotEnoughInfo][(i % 3) as usize];
            let ev = if label == Label::NotEnoughInfo {
                vec![]
            } else {
                vec![vec![s("P", i as u32)]]
            };
            claims.push(claim(i, label, ev));
        }
        let verdicts: Verdicts = claims
            .iter()
            .map(|c| {
                (
                    c.id,
                    Verdict {
                        label: c.label,
                        evidence: vec![],
                    },
                )
            })
            .collect();
        assert!((fever_score(&verdicts, &claims, 5).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(label_accuracy(&verdicts, &claims).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_counts_matches() {
        let claims: Vec<Claim> = (0..10).map(|i| claim(i, Label::Supported, vec![])).collect();
        let verdicts: Verdicts = (0..10)
            .map(|i| {
                let label = if i < 7 { Label::Supported } else { Label::Refuted };
                (
                    i,
                    Verdict {
                        label,
                        evidence: vec![],
                    },
                )
            })
            .collect();
        assert!((label_accuracy(&verdicts, &claims).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn document_level_uses_pages() {
        let claims = [claim(1, Label::Supported, vec![vec![s("A", 0), s("B", 1)]])];
        let preds = BTreeMap::from([(1, vec!["B".to_string(), "A".to_string()])]);
        assert_eq!(doc_recall_at_k(&preds, &claims, 20).unwrap(), 1.0);
        assert_eq!(doc_recall_at_k(&preds, &claims, 1).unwrap(), 0.0);
        assert_eq!(doc_mistakes(&preds, &claims, 1).unwrap(), (0, 0));
    }
}
