//! Top-k page retrieval: TF-IDF cosine plus a bonus for pages whose title
//! is mentioned verbatim (as a token run) in the claim.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::claims::Claim;
use crate::corpus::Corpus;
use crate::index::{sort_ranked, Granularity, InvertedIndex};
use crate::text::{contains_subsequence, title_tokens, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DocRetrievalConfig {
    pub k: usize,
    pub title_match_weight: f64,
}

impl Default for DocRetrievalConfig {
    fn default() -> Self {
        DocRetrievalConfig {
            k: 20,
            title_match_weight: 2.0,
        }
    }
}

/// Page retriever over a corpus and its document-granularity index.
pub struct DocRetriever<'a> {
    corpus: &'a Corpus,
    index: &'a InvertedIndex,
    /// title tokens → pages carrying that (stripped) title
    titles: Vec<(Vec<String>, String)>,
}

impl<'a> DocRetriever<'a> {
    pub fn new(corpus: &'a Corpus, index: &'a InvertedIndex) -> Self {
        assert_eq!(index.granularity, Granularity::Document, "retriever needs a page index");
        let titles = corpus
            .documents()
            .map(|d| (title_tokens(&d.page_id), d.page_id.clone()))
            .filter(|(t, _)| !t.is_empty())
            .collect();
        DocRetriever { corpus, index, titles }
    }

    pub fn corpus(&self) -> &Corpus {
        self.corpus
    }

    /// Pages whose title occurs as a contiguous token run of the claim.
    pub fn title_matches(&self, claim_text: &str) -> Vec<&str> {
        let claim = tokenize(claim_text);
        self.titles
            .iter()
            .filter(|(t, _)| contains_subsequence(&claim, t))
            .map(|(_, p)| p.as_str())
            .collect()
    }

    pub fn retrieve(&self, claim_text: &str, config: &DocRetrievalConfig) -> Vec<String> {
        let mut scores: BTreeMap<String, f64> = self
            .index
            .rank_all(claim_text)
            .into_iter()
            .map(|(k, s)| (k.page_id, s))
            .collect();
        for page in self.title_matches(claim_text) {
            *scores.entry(page.to_string()).or_default() += config.title_match_weight;
        }
        let mut ranked: Vec<(String, f64)> = scores.into_iter().collect();
        sort_ranked(&mut ranked);
        ranked.truncate(config.k);
        ranked.into_iter().map(|(p, _)| p).collect()
    }

    /// Plain retrieval with every gold page appended when absent.
    pub fn retrieve_oracle(&self, claim: &Claim, config: &DocRetrievalConfig) -> Vec<String> {
        let mut pages = self.retrieve(&claim.text, config);
        let mut seen: HashSet<String> = pages.iter().cloned().collect();
        for page in claim.gold_pages() {
            if seen.insert(page.clone()) {
                pages.push(page);
            }
        }
        pages
    }
}

pub fn retrieve_documents(
    corpus: &Corpus,
    index: &InvertedIndex,
    claim_text: &str,
    config: &DocRetrievalConfig,
) -> Vec<String> {
    DocRetriever::new(corpus, index).retrieve(claim_text, config)
}

pub fn retrieve_documents_oracle(
    corpus: &Corpus,
    index: &InvertedIndex,
    claim: &Claim,
    config: &DocRetrievalConfig,
) -> Vec<String> {
    DocRetriever::new(corpus, index).retrieve_oracle(claim, config)
}
