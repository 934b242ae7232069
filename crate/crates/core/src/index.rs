//! TF-IDF inverted index over pages or sentences.
//!
//! Weights are raw term count times `ln((N + 1) / (df + 1)) + 1`; ranking is
//! by cosine similarity between query and candidate weight vectors.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SentenceId};
use crate::error::{Error, Result};
use crate::text::{title_tokens, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Document,
    Sentence,
}

/// Identifier of an indexed unit. Pages carry `line: None`; ordering is by
/// page title, then line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexKey {
    pub page_id: String,
    pub line: Option<u32>,
}

impl IndexKey {
    pub fn page(page_id: impl Into<String>) -> Self {
        IndexKey {
            page_id: page_id.into(),
            line: None,
        }
    }

    pub fn sentence_id(&self) -> Option<SentenceId> {
        self.line.map(|line| SentenceId::new(self.page_id.clone(), line))
    }
}

impl From<SentenceId> for IndexKey {
    fn from(id: SentenceId) -> Self {
        IndexKey {
            page_id: id.page_id,
            line: Some(id.line),
        }
    }
}

impl fmt::Display for IndexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}", self.page_id, line),
            None => f.write_str(&self.page_id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    /// Position of the unit in [`InvertedIndex::keys`].
    pub unit: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    pub granularity: Granularity,
    /// Indexed units in identifier order; postings refer to positions here.
    pub keys: Vec<IndexKey>,
    /// token → document frequency
    pub vocabulary: BTreeMap<String, u32>,
    /// token → postings sorted by unit
    pub postings: BTreeMap<String, Vec<Posting>>,
    /// Euclidean norm of each unit's TF-IDF vector.
    norms: Vec<f64>,
}

impl InvertedIndex {
    pub fn doc_count(&self) -> usize {
        self.keys.len()
    }

    pub fn df(&self, token: &str) -> u32 {
        self.vocabulary.get(token).copied().unwrap_or(0)
    }

    /// Smoothed idf; tokens outside the vocabulary get the maximum value.
    pub fn idf(&self, token: &str) -> f64 {
        let n = self.doc_count() as f64;
        ((n + 1.0) / (self.df(token) as f64 + 1.0)).ln() + 1.0
    }

    pub fn position(&self, key: &IndexKey) -> Option<usize> {
        self.keys.binary_search(key).ok()
    }

    /// Cosine similarity of two token bags under this index's idf.
    pub fn cosine(&self, a: &[String], b: &[String]) -> f64 {
        let va = self.weights(a);
        let vb = self.weights(b);
        let dot: f64 = va.iter().filter_map(|(t, wa)| vb.get(t).map(|wb| wa * wb)).sum();
        let na = va.values().map(|w| w * w).sum::<f64>().sqrt();
        let nb = vb.values().map(|w| w * w).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }

    fn weights<'a>(&self, tokens: &'a [String]) -> BTreeMap<&'a str, f64> {
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.as_str()).or_default() += 1;
        }
        tf.into_iter().map(|(t, c)| (t, c as f64 * self.idf(t))).collect()
    }

    /// Every unit sharing at least one token with `query`, best first.
    pub fn rank_all(&self, query: &str) -> Vec<(IndexKey, f64)> {
        let mut qtf: BTreeMap<String, u32> = BTreeMap::new();
        for t in tokenize(query) {
            if self.vocabulary.contains_key(&t) {
                *qtf.entry(t).or_default() += 1;
            }
        }
        if qtf.is_empty() {
            return Vec::new();
        }
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        let mut qnorm = 0.0;
        for (token, count) in &qtf {
            let idf = self.idf(token);
            let qw = *count as f64 * idf;
            qnorm += qw * qw;
            for p in &self.postings[token] {
                *acc.entry(p.unit).or_default() += qw * p.tf as f64 * idf;
            }
        }
        let qnorm = qnorm.sqrt();
        let mut ranked: Vec<(IndexKey, f64)> = acc
            .into_iter()
            .filter(|&(u, dot)| dot > 0.0 && self.norms[u as usize] > 0.0)
            .map(|(u, dot)| (self.keys[u as usize].clone(), dot / (qnorm * self.norms[u as usize])))
            .collect();
        sort_ranked(&mut ranked);
        ranked
    }

    /// Canonical byte form: identical corpora give identical bytes.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("index is always serializable")
    }
}

/// Score descending, identifier ascending on ties.
pub fn sort_ranked<K: Ord>(ranked: &mut [(K, f64)]) {
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

pub fn build_index(corpus: &Corpus, granularity: Granularity) -> Result<InvertedIndex> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut units: Vec<(IndexKey, Vec<String>)> = Vec::new();
    for doc in corpus.documents() {
        match granularity {
            Granularity::Document => {
                let tokens = doc.candidates().flat_map(|s| tokenize(&s.text)).collect();
                units.push((IndexKey::page(doc.page_id.clone()), tokens));
            }
            Granularity::Sentence => {
                let title = title_tokens(&doc.page_id);
                for s in doc.candidates() {
                    let mut tokens = title.clone();
                    tokens.extend(tokenize(&s.text));
                    units.push((SentenceId::new(doc.page_id.clone(), s.line).into(), tokens));
                }
            }
        }
    }
    // corpus iteration is already in title order, lines ascending within a page
    debug_assert!(units.windows(2).all(|w| w[0].0 < w[1].0));

    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut tfs: Vec<BTreeMap<&str, u32>> = Vec::with_capacity(units.len());
    for (unit, (_, tokens)) in units.iter().enumerate() {
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.as_str()).or_default() += 1;
        }
        for (&t, &c) in &tf {
            postings.entry(t.to_string()).or_default().push(Posting {
                unit: unit as u32,
                tf: c,
            });
        }
        tfs.push(tf);
    }
    let vocabulary: BTreeMap<String, u32> = postings.iter().map(|(t, p)| (t.clone(), p.len() as u32)).collect();

    let n = units.len() as f64;
    let idf = |t: &str| ((n + 1.0) / (vocabulary[t] as f64 + 1.0)).ln() + 1.0;
    let norms = tfs
        .iter()
        .map(|tf| tf.iter().map(|(t, &c)| (c as f64 * idf(t)).powi(2)).sum::<f64>().sqrt())
        .collect();

    Ok(InvertedIndex {
        granularity,
        keys: units.into_iter().map(|(k, _)| k).collect(),
        vocabulary,
        postings,
        norms,
    })
}

/// Top-`k` units by TF-IDF cosine with `query`.
pub fn tfidf_rank(index: &InvertedIndex, query: &str, k: usize) -> Vec<(IndexKey, f64)> {
    let mut ranked = index.rank_all(query);
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(docs: &[(&str, &[&str])]) -> Corpus {
        Corpus::from_documents(docs.iter().map(|(id, s)| Document::from_texts(*id, s))).unwrap()
    }

    #[test]
    fn document_frequency_counts_pages() {
        let c = corpus(&[("A", &["BBC news."]), ("B", &["The bbc.", "More BBC."])]);
        let idx = build_index(&c, Granularity::Document).unwrap();
        assert_eq!(idx.df("bbc"), 2);
        assert_eq!(idx.df("absent"), 0);
        assert!(!idx.postings.contains_key("absent"));
    }

    #[test]
    fn term_frequency_within_sentence() {
        let c = corpus(&[("Page", &["BBC, bbc!"])]);
        let idx = build_index(&c, Granularity::Sentence).unwrap();
        assert_eq!(idx.postings["bbc"][0].tf, 2);
        // title tokens are prepended at sentence granularity
        assert_eq!(idx.postings["page"][0].tf, 1);
    }

    #[test]
    fn blank_sentences_are_not_indexed() {
        let c = corpus(&[("A", &["one", "", "  ", "two"])]);
        let idx = build_index(&c, Granularity::Sentence).unwrap();
        let lines: Vec<_> = idx.keys.iter().map(|k| k.line.unwrap()).collect();
        assert_eq!(lines, vec![0, 3]);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(
            build_index(&Corpus::default(), Granularity::Document),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn out_of_vocabulary_query_is_empty() {
        let c = corpus(&[("A", &["alpha beta"])]);
        let idx = build_index(&c, Granularity::Document).unwrap();
        assert!(tfidf_rank(&idx, "gamma delta", 5).is_empty());
        assert!(tfidf_rank(&idx, "", 5).is_empty());
    }

    #[test]
    fn ties_break_by_identifier() {
        let c = corpus(&[("Zed", &["same words"]), ("Abe", &["same words"]), ("Mid", &["other"])]);
        let idx = build_index(&c, Granularity::Document).unwrap();
        let ranked = tfidf_rank(&idx, "same words", 10);
        assert_eq!(ranked.len(), 2);
        assert_eq!(ranked[0].1, ranked[1].1);
        assert_eq!(ranked[0].0.page_id, "Abe");
        assert_eq!(ranked[1].0.page_id, "Zed");
    }

    #[test]
    fn full_text_query_ranks_its_document_first() {
        let c = corpus(&[
            ("A", &["the cat sat on the mat"]),
            ("B", &["a dog chased the cat"]),
            ("C", &["mat weaving is a craft"]),
        ]);
        let idx = build_index(&c, Granularity::Document).unwrap();
        let ranked = tfidf_rank(&idx, "a dog chased the cat", 3);
        assert_eq!(ranked[0].0.page_id, "B");
        assert!((ranked[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(tfidf_rank(&idx, "a dog chased the cat", 1).len(), 1);
    }

    #[test]
    fn cosine_of_identical_bags_is_one() {
        let c = corpus(&[("A", &["x y z"])]);
        let idx = build_index(&c, Granularity::Sentence).unwrap();
        let t = tokenize("x y unknown");
        assert!((idx.cosine(&t, &t) - 1.0).abs() < 1e-12);
        assert_eq!(idx.cosine(&t, &[]), 0.0);
    }
}
