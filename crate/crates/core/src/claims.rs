//! FEVER-format claims: `{"id", "label", "claim", "evidence"}` JSON-lines.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::SentenceId;
use crate::error::{Error, Result};
use crate::jsonl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "SUPPORTS")]
    Supported,
    #[serde(rename = "REFUTES")]
    Refuted,
    #[serde(rename = "NOT ENOUGH INFO")]
    NotEnoughInfo,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Supported, Label::Refuted, Label::NotEnoughInfo];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Supported => "SUPPORTS",
            Label::Refuted => "REFUTES",
            Label::NotEnoughInfo => "NOT ENOUGH INFO",
        }
    }

    pub fn is_verifiable(self) -> bool {
        self != Label::NotEnoughInfo
    }

    /// Dense class index used by the NLI model.
    pub fn index(self) -> usize {
        match self {
            Label::Supported => 0,
            Label::Refuted => 1,
            Label::NotEnoughInfo => 2,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "SUPPORTS" => Ok(Label::Supported),
            "REFUTES" => Ok(Label::Refuted),
            "NOT ENOUGH INFO" => Ok(Label::NotEnoughInfo),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Sentences that jointly verify a claim.
pub type EvidenceGroup = Vec<SentenceId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub id: u64,
    pub label: Label,
    pub text: String,
    /// Alternative evidence groups; empty for NEI claims.
    pub evidence: Vec<EvidenceGroup>,
}

impl Claim {
    /// Verifiable and carrying at least one evidence group.
    pub fn is_verifiable(&self) -> bool {
        self.label.is_verifiable() && !self.evidence.is_empty()
    }

    /// Every gold sentence, sorted and deduplicated across groups.
    pub fn gold_sentences(&self) -> Vec<SentenceId> {
        let mut all: Vec<SentenceId> = self.evidence.iter().flatten().cloned().collect();
        all.sort();
        all.dedup();
        all
    }

    /// Every gold page, sorted and deduplicated.
    pub fn gold_pages(&self) -> Vec<String> {
        let mut pages: Vec<String> = self.evidence.iter().flatten().map(|s| s.page_id.clone()).collect();
        pages.sort();
        pages.dedup();
        pages
    }
}

/// `[annotation_id, evidence_id, page, line]` as stored on disk.
type EvidenceSlot = (Value, Value, Option<String>, Option<u32>);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ClaimRecord {
    pub id: u64,
    pub label: Label,
    pub claim: String,
    pub evidence: Vec<Vec<EvidenceSlot>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_claim_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replaced: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replacement: Option<String>,
}

impl ClaimRecord {
    pub(crate) fn from_claim(claim: &Claim) -> Self {
        let evidence = if claim.evidence.is_empty() {
            vec![vec![(Value::Null, Value::Null, None, None)]]
        } else {
            claim
                .evidence
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|s| (Value::Null, Value::Null, Some(s.page_id.clone()), Some(s.line)))
                        .collect()
                })
                .collect()
        };
        ClaimRecord {
            id: claim.id,
            label: claim.label,
            claim: claim.text.clone(),
            evidence,
            source_claim_id: None,
            replaced: None,
            replacement: None,
        }
    }

    pub(crate) fn into_claim(self) -> Claim {
        let evidence = self
            .evidence
            .into_iter()
            .filter_map(|group| {
                let ids: Option<Vec<SentenceId>> = group
                    .into_iter()
                    .map(|(_, _, page, line)| Some(SentenceId::new(page?, line?)))
                    .collect();
                ids.filter(|g| !g.is_empty())
            })
            .collect();
        Claim {
            id: self.id,
            label: self.label,
            text: self.claim,
            evidence,
        }
    }
}

pub fn parse_claim_line(line: &str) -> Result<Claim, serde_json::Error> {
    serde_json::from_str::<ClaimRecord>(line).map(ClaimRecord::into_claim)
}

pub fn claim_to_line(claim: &Claim) -> String {
    serde_json::to_string(&ClaimRecord::from_claim(claim)).expect("claims always serialize")
}

pub fn load_claims(path: &Path) -> Result<Vec<Claim>> {
    jsonl::read_records::<ClaimRecord>(path).map(|v| v.into_iter().map(ClaimRecord::into_claim).collect())
}

pub fn write_claims(path: &Path, claims: &[Claim]) -> Result<()> {
    let body: String = claims.iter().map(|c| claim_to_line(c) + "\n").collect();
    fs::write(path, body).map_err(|e| Error::io(path, e))
}
