//! TF-IDF negative sampling for selector training.
//!
//! For every positive sentence the sampler draws up to three groups from the
//! claim's TF-IDF sentence ranking:
//!
//! - **A**: top sentences from pages that hold a positive;
//! - **B**: top sentences from pages that hold no positive;
//! - **C**: the best sentence of each of several further pages not yet
//!   touched for this claim.
//!
//! Sentences are never repeated within a claim and positives are never
//! returned. The draw depends only on the ranking, so it is reproducible
//! without a random stream.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::SentenceId;
use crate::index::{Granularity, InvertedIndex};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeGroups {
    pub positive: Option<SentenceId>,
    pub same_page: Vec<SentenceId>,
    pub other_page: Vec<SentenceId>,
    pub fresh_page: Vec<SentenceId>,
}

impl NegativeGroups {
    pub fn len(&self) -> usize {
        self.same_page.len() + self.other_page.len() + self.fresh_page.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &SentenceId> {
        self.same_page.iter().chain(&self.other_page).chain(&self.fresh_page)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeSampler {
    /// Group sizes A, B, C.
    pub group_sizes: [usize; 3],
}

impl NegativeSampler {
    /// Splits `per_positive` into three near-equal groups (15 → 5/5/5).
    pub fn new(per_positive: usize) -> Self {
        NegativeSampler {
            group_sizes: [per_positive.div_ceil(3), (per_positive + 1) / 3, per_positive / 3],
        }
    }

    pub fn sample(
        &self,
        claim_text: &str,
        positives: &[SentenceId],
        sentence_index: &InvertedIndex,
    ) -> Vec<NegativeGroups> {
        assert_eq!(sentence_index.granularity, Granularity::Sentence);
        let ranked: Vec<SentenceId> = sentence_index
            .rank_all(claim_text)
            .into_iter()
            .filter_map(|(k, _)| k.sentence_id())
            .collect();
        let positive_pages: HashSet<&str> = positives.iter().map(|p| p.page_id.as_str()).collect();
        let mut used: HashSet<&SentenceId> = positives.iter().collect();
        let mut used_pages: HashSet<&str> = positive_pages.clone();
        let [a, b, c] = self.group_sizes;

        let mut out = Vec::with_capacity(positives.len());
        for positive in positives {
            let mut groups = NegativeGroups {
                positive: Some(positive.clone()),
                ..Default::default()
            };
            for id in &ranked {
                if groups.same_page.len() == a {
                    break;
                }
                if positive_pages.contains(id.page_id.as_str()) && used.insert(id) {
                    groups.same_page.push(id.clone());
                }
            }
            for id in &ranked {
                if groups.other_page.len() == b {
                    break;
                }
                if !positive_pages.contains(id.page_id.as_str()) && used.insert(id) {
                    groups.other_page.push(id.clone());
                    used_pages.insert(&id.page_id);
                }
            }
            for id in &ranked {
                if groups.fresh_page.len() == c {
                    break;
                }
                // the first hit of a page in rank order is its top sentence
                if !used_pages.contains(id.page_id.as_str()) && used.insert(id) {
                    groups.fresh_page.push(id.clone());
                    used_pages.insert(&id.page_id);
                }
            }
            out.push(groups);
        }
        out
    }
}

pub fn sample_negatives(
    claim_text: &str,
    positives: &[SentenceId],
    sentence_index: &InvertedIndex,
    per_positive: usize,
) -> Vec<NegativeGroups> {
    NegativeSampler::new(per_positive).sample(claim_text, positives, sentence_index)
}
