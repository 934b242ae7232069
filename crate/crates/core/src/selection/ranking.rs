//! Sentence ranking over candidate pages and SUP/REF score aggregation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::features::{Candidate, ClaimProfile};
use super::model::RelevanceScorer;
use crate::corpus::{Corpus, SentenceId};
use crate::error::Result;
use crate::index::{sort_ranked, InvertedIndex};

/// Sentences with relevance scores, best first, ties by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedEvidence {
    pub items: Vec<(SentenceId, f64)>,
}

impl RankedEvidence {
    pub fn from_scores(scores: impl IntoIterator<Item = (SentenceId, f64)>, k: usize) -> Self {
        let mut items: Vec<(SentenceId, f64)> = scores.into_iter().collect();
        sort_ranked(&mut items);
        items.truncate(k);
        RankedEvidence { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &SentenceId> {
        self.items.iter().map(|(id, _)| id)
    }

    pub fn truncated(&self, k: usize) -> Self {
        RankedEvidence {
            items: self.items.iter().take(k).cloned().collect(),
        }
    }
}

/// `"<title without disambiguator>. <sentence>"`
pub fn candidate_text(corpus: &Corpus, id: &SentenceId) -> Result<String> {
    Candidate::resolve(corpus, id).map(|c| c.text())
}

/// Scores every non-blank sentence of the candidate pages and keeps the top `k`.
pub fn select_sentences<S: RelevanceScorer + ?Sized>(
    scorer: &S,
    claim_text: &str,
    candidate_pages: &[String],
    corpus: &Corpus,
    stats: &InvertedIndex,
    k: usize,
) -> RankedEvidence {
    let profile = ClaimProfile::new(claim_text, stats);
    let pages: BTreeSet<&str> = candidate_pages.iter().map(String::as_str).collect();
    let mut scores = Vec::new();
    for page in pages {
        let Some(doc) = corpus.get(page) else {
            log::warn!("candidate page `{page}` is not in the corpus");
            continue;
        };
        for s in doc.candidates() {
            let cand = Candidate::new(&doc.page_id, &s.text, doc.relative_position(s.line));
            scores.push((SentenceId::new(page, s.line), scorer.relevance(&profile, &cand, stats)));
        }
    }
    RankedEvidence::from_scores(scores, k)
}

/// Union of two rankings keeping each sentence's higher score, top `k`.
pub fn aggregate_sr(sup: &RankedEvidence, refuting: &RankedEvidence, k: usize) -> RankedEvidence {
    let mut best: BTreeMap<&SentenceId, f64> = BTreeMap::new();
    for (id, score) in sup.items.iter().chain(&refuting.items) {
        let slot = best.entry(id).or_insert(*score);
        *slot = slot.max(*score);
    }
    RankedEvidence::from_scores(best.into_iter().map(|(id, s)| (id.clone(), s)), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn ranked(items: &[(&str, u32, f64)]) -> RankedEvidence {
        RankedEvidence::from_scores(items.iter().map(|&(p, l, s)| (SentenceId::new(p, l), s)), usize::MAX)
    }

    #[test]
    fn disjoint_lists_merge_by_score() {
        let sup = ranked(&[("A", 0, 0.9), ("A", 1, 0.5), ("B", 0, 0.1)]);
        let rf = ranked(&[("C", 0, 0.7), ("C", 1, 0.6), ("D", 0, 0.05)]);
        let merged = aggregate_sr(&sup, &rf, 4);
        let got: Vec<(String, f64)> = merged.items.iter().map(|(id, s)| (id.to_string(), *s)).collect();
        assert_eq!(
            got,
            vec![
                ("A:0".into(), 0.9),
                ("C:0".into(), 0.7),
                ("C:1".into(), 0.6),
                ("A:1".into(), 0.5)
            ]
        );
    }

    #[test]
    fn shared_sentence_keeps_max() {
        let sup = ranked(&[("X", 3, 0.4)]);
        let rf = ranked(&[("X", 3, 0.9)]);
        assert_eq!(aggregate_sr(&sup, &rf, 5).items, vec![(SentenceId::new("X", 3), 0.9)]);
    }

    #[test]
    fn empty_side_truncates_other() {
        let sup = ranked(&[("A", 0, 0.9), ("A", 1, 0.5), ("B", 0, 0.1)]);
        assert_eq!(aggregate_sr(&sup, &RankedEvidence::default(), 2), sup.truncated(2));
        assert_eq!(aggregate_sr(&RankedEvidence::default(), &sup, 2), sup.truncated(2));
    }

    #[test]
    fn candidate_text_prefixes_stripped_title() {
        let corpus = Corpus::from_documents([
            Document::from_texts("Johnny Galecki", &["x", "He is known for playing David Healy."]),
            Document::from_texts(
                "Blind Faith (miniseries)",
                &["Blind Faith is a 1990 NBC miniseries.", ""],
            ),
        ])
        .unwrap();
        assert_eq!(
            candidate_text(&corpus, &SentenceId::new("Johnny Galecki", 1)).unwrap(),
            "Johnny Galecki. He is known for playing David Healy."
        );
        assert!(candidate_text(&corpus, &SentenceId::new("Blind Faith (miniseries)", 0))
            .unwrap()
            .starts_with("Blind Faith. "));
        assert_eq!(
            candidate_text(&corpus, &SentenceId::new("Blind Faith (miniseries)", 1)).unwrap(),
            "Blind Faith. "
        );
        assert!(candidate_text(&corpus, &SentenceId::new("Nope", 0)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn evidence() -> impl Strategy<Value = RankedEvidence> {
            proptest::collection::vec((0u8..4, 0u32..4, 0.0f64..1.0), 0..10).prop_map(|v| {
                let mut seen = BTreeMap::new();
                for (p, l, s) in v {
                    seen.insert(SentenceId::new(format!("P{p}"), l), s);
                }
                RankedEvidence::from_scores(seen, usize::MAX)
            })
        }

        proptest! {
            #[test]
            fn aggregation_is_symmetric_and_sorted(a in evidence(), b in evidence(), k in 0usize..12) {
                let ab = aggregate_sr(&a, &b, k);
                prop_assert_eq!(&ab, &aggregate_sr(&b, &a, k));
                prop_assert!(ab.len() <= k);
                prop_assert!(ab.items.windows(2).all(|w| w[0].1 >= w[1].1));
                let ids: BTreeSet<_> = ab.ids().collect();
                prop_assert_eq!(ids.len(), ab.len());
            }
        }
    }
}
