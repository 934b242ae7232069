//! Lexical relevance features for a (claim, candidate sentence) pair.
//!
//! | # | feature |
//! |---|---------|
//! | 0 | unigram overlap / distinct claim tokens |
//! | 1 | bigram overlap / distinct claim bigrams |
//! | 2 | TF-IDF cosine of claim and candidate |
//! | 3 | idf mass of shared tokens / idf mass of claim tokens |
//! | 4 | fraction of claim capitalized spans fully inside the title |
//! | 5 | the same, inside the sentence body |
//! | 6 | ln(1 + body token count) |
//! | 7 | title occurs as a token run of the claim |
//! | 8 | relative position of the sentence in its page |
//! | 9 | fraction of claim token occurrences missing from the candidate |
//!
//! The candidate is the stripped page title followed by the sentence body,
//! the same text [`candidate_text`](super::candidate_text) renders.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, SentenceId};
use crate::error::{Error, Result};
use crate::index::InvertedIndex;
use crate::scalar::Scalar;
use crate::text::{bigrams, capitalized_spans, contains_subsequence, strip_disambiguation, tokenize};

pub const SELECTION_FEATURES: [&str; 10] = [
    "unigram_overlap",
    "bigram_overlap",
    "tfidf_cosine",
    "idf_weighted_overlap",
    "claim_spans_in_title",
    "claim_spans_in_body",
    "log_sentence_length",
    "title_in_claim",
    "sentence_position",
    "claim_tokens_missing",
];

/// Hex SHA-256 over the newline-joined feature names.
pub fn schema_hash(names: &[&str]) -> String {
    let digest = Sha256::digest(names.join("\n").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Scalar")]
pub struct FeatureVector<T>(pub Vec<T>);

impl<T: Scalar> FeatureVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// A candidate sentence with its page context.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub title: String,
    pub body: String,
    /// Ordinal position within the page, in `[0, 1)`.
    pub position: f64,
}

impl Candidate {
    pub fn new(title: &str, body: &str, position: f64) -> Self {
        Candidate {
            title: strip_disambiguation(title).to_string(),
            body: body.to_string(),
            position,
        }
    }

    pub fn resolve(corpus: &Corpus, id: &SentenceId) -> Result<Self> {
        let unresolvable = || Error::UnresolvableSentence {
            page: id.page_id.clone(),
            line: id.line,
        };
        let doc = corpus.get(&id.page_id).ok_or_else(unresolvable)?;
        let sentence = doc.sentence(id.line).ok_or_else(unresolvable)?;
        Ok(Candidate::new(
            &id.page_id,
            &sentence.text,
            doc.relative_position(id.line),
        ))
    }

    pub fn text(&self) -> String {
        format!("{}. {}", self.title, self.body)
    }
}

/// Claim-side quantities reused across every candidate of one claim.
#[derive(Debug, Clone)]
pub struct ClaimProfile {
    pub text: String,
    pub tokens: Vec<String>,
    distinct: BTreeSet<String>,
    bigrams: BTreeSet<(String, String)>,
    spans: Vec<Vec<String>>,
    idf_mass: f64,
}

impl ClaimProfile {
    pub fn new(text: &str, stats: &InvertedIndex) -> Self {
        let tokens = tokenize(text);
        let distinct: BTreeSet<String> = tokens.iter().cloned().collect();
        let bigrams = bigrams(&tokens)
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let idf_mass = distinct.iter().map(|t| stats.idf(t)).sum();
        ClaimProfile {
            text: text.to_string(),
            spans: capitalized_spans(text),
            tokens,
            distinct,
            bigrams,
            idf_mass,
        }
    }

    pub fn features<T: Scalar>(&self, cand: &Candidate, stats: &InvertedIndex) -> FeatureVector<T> {
        FeatureVector(self.raw_features(cand, stats).into_iter().map(T::of).collect())
    }

    pub(crate) fn raw_features(&self, cand: &Candidate, stats: &InvertedIndex) -> Vec<f64> {
        let title = tokenize(&cand.title);
        let body = tokenize(&cand.body);
        let mut all = title.clone();
        all.extend(body.iter().cloned());
        let all_set: HashSet<&str> = all.iter().map(String::as_str).collect();

        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };

        let shared: Vec<&String> = self.distinct.iter().filter(|t| all_set.contains(t.as_str())).collect();
        let unigram = ratio(shared.len() as f64, self.distinct.len() as f64);

        let cand_bigrams: HashSet<(&str, &str)> = bigrams(&all).into_iter().collect();
        let bigram_hits = self
            .bigrams
            .iter()
            .filter(|(a, b)| cand_bigrams.contains(&(a.as_str(), b.as_str())))
            .count();
        let bigram = bigram_hits as f64 / (self.bigrams.len().max(1)) as f64;

        let cosine = stats.cosine(&self.tokens, &all);
        let idf_overlap = ratio(shared.iter().map(|t| stats.idf(t)).sum(), self.idf_mass);

        let title_set: HashSet<&str> = title.iter().map(String::as_str).collect();
        let body_set: HashSet<&str> = body.iter().map(String::as_str).collect();
        let span_fraction = |set: &HashSet<&str>| {
            let hits = self
                .spans
                .iter()
                .filter(|s| s.iter().all(|t| set.contains(t.as_str())))
                .count();
            ratio(hits as f64, self.spans.len() as f64)
        };

        let title_in_claim = f64::from(u8::from(contains_subsequence(&self.tokens, &title)));
        let missing = self.tokens.iter().filter(|t| !all_set.contains(t.as_str())).count();

        vec![
            unigram,
            bigram,
            cosine,
            idf_overlap,
            span_fraction(&title_set),
            span_fraction(&body_set),
            (1.0 + body.len() as f64).ln(),
            title_in_claim,
            cand.position,
            ratio(missing as f64, self.tokens.len() as f64),
        ]
    }
}

pub fn extract_features<T: Scalar>(claim_text: &str, candidate: &Candidate, stats: &InvertedIndex) -> FeatureVector<T> {
    ClaimProfile::new(claim_text, stats).features(candidate, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::index::{build_index, Granularity};

    fn stats() -> InvertedIndex {
        let corpus = Corpus::from_documents([
            Document::from_texts(
                "Stan Beeman",
                &["Stan Beeman acts in a US TV series.", "He is an agent."],
            ),
            Document::from_texts("BBC", &["The BBC is a broadcaster."]),
        ])
        .unwrap();
        build_index(&corpus, Granularity::Sentence).unwrap()
    }

    #[test]
    fn identical_candidate_has_full_overlap() {
        let stats = stats();
        let f = extract_features::<f64>("the bbc is", &Candidate::new("", "the bbc is", 0.0), &stats);
        assert_eq!(f.len(), SELECTION_FEATURES.len());
        assert_eq!(f.0[0], 1.0);
        assert_eq!(f.0[1], 1.0);
        assert!((f.0[2] - 1.0).abs() < 1e-12);
        assert!((f.0[3] - 1.0).abs() < 1e-12);
        assert_eq!(f.0[9], 0.0);
    }

    #[test]
    fn disjoint_tokens_have_no_overlap() {
        let stats = stats();
        let f = extract_features::<f64>("alpha beta", &Candidate::new("Gamma", "delta epsilon", 0.5), &stats);
        assert_eq!(&f.0[..4], &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.0[7], 0.0);
        assert_eq!(f.0[9], 1.0);
    }

    #[test]
    fn hand_computed_vector() {
        let stats = stats();
        // claim tokens: stan beeman is only in shows on bbc (8 distinct)
        // candidate: "Stan Beeman" + "He is an agent." → stan beeman he is an agent
        let claim = "Stan Beeman is only in shows on BBC.";
        let cand = Candidate::new("Stan Beeman", "He is an agent.", 0.5);
        let f = extract_features::<f64>(claim, &cand, &stats);
        let n = stats.doc_count() as f64; // 3 sentences
        let idf = |df: f64| ((n + 1.0) / (df + 1.0)).ln() + 1.0;
        // df: stan 2, beeman 2, is 2, in 1, bbc 1, only/shows/on 0
        let mass = 2.0 * idf(2.0) + idf(2.0) + 2.0 * idf(1.0) + 3.0 * idf(0.0);
        let shared = 2.0 * idf(2.0) + idf(2.0);
        let expected_cosine = {
            // claim weights: stan, beeman (idf 2), is (idf 2), in, bbc (idf 1), only, shows, on (idf 0)
            let q = [
                idf(2.0),
                idf(2.0),
                idf(2.0),
                idf(1.0),
                idf(1.0),
                idf(0.0),
                idf(0.0),
                idf(0.0),
            ];
            // candidate weights: stan, beeman, is, he, an, agent (he/an/agent df 1)
            let d = [idf(2.0), idf(2.0), idf(2.0), idf(1.0), idf(1.0), idf(1.0)];
            let dot = 2.0 * idf(2.0).powi(2) + idf(2.0).powi(2);
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            dot / (norm(&q) * norm(&d))
        };
        let expected = [
            3.0 / 8.0,
            1.0 / 7.0,
            expected_cosine,
            shared / mass,
            1.0, // the only span, [stan beeman], sits in the title
            0.0,
            (1.0f64 + 4.0).ln(),
            1.0,
            0.5,
            5.0 / 8.0,
        ];
        for (i, (got, want)) in f.0.iter().zip(expected).enumerate() {
            assert!((got - want).abs() < 1e-12, "feature {i}: {got} vs {want}");
        }
    }
}
