//! Intermediate files passed between pipeline stages (JSON-lines).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::claims::Label;
use crate::corpus::SentenceId;
use crate::error::Result;
use crate::evaluation::{Predictions, Verdict, Verdicts};
use crate::jsonl;
use crate::selection::RankedEvidence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocsRecord {
    pub claim_id: u64,
    pub pages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub claim_id: u64,
    pub evidence: Vec<(String, u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub claim_id: u64,
    pub predicted_label: Label,
    pub predicted_evidence: Vec<(String, u32)>,
}

pub fn write_docs(path: &Path, docs: &BTreeMap<u64, Vec<String>>) -> Result<()> {
    let records: Vec<DocsRecord> = docs
        .iter()
        .map(|(&claim_id, pages)| DocsRecord {
            claim_id,
            pages: pages.clone(),
        })
        .collect();
    jsonl::write_records(path, &records)
}

pub fn read_docs(path: &Path) -> Result<BTreeMap<u64, Vec<String>>> {
    Ok(jsonl::read_records::<DocsRecord>(path)?
        .into_iter()
        .map(|r| (r.claim_id, r.pages))
        .collect())
}

pub fn write_selections(path: &Path, selections: &BTreeMap<u64, RankedEvidence>) -> Result<()> {
    let records: Vec<SelectionRecord> = selections
        .iter()
        .map(|(&claim_id, r)| SelectionRecord {
            claim_id,
            evidence: r
                .items
                .iter()
                .map(|(id, s)| (id.page_id.clone(), id.line, *s))
                .collect(),
        })
        .collect();
    jsonl::write_records(path, &records)
}

pub fn read_selections(path: &Path) -> Result<BTreeMap<u64, RankedEvidence>> {
    Ok(jsonl::read_records::<SelectionRecord>(path)?
        .into_iter()
        .map(|r| {
            let items = r
                .evidence
                .into_iter()
                .map(|(p, l, s)| (SentenceId::new(p, l), s))
                .collect();
            (r.claim_id, RankedEvidence { items })
        })
        .collect())
}

pub fn selections_to_predictions(selections: &BTreeMap<u64, RankedEvidence>) -> Predictions {
    selections
        .iter()
        .map(|(&id, r)| (id, r.ids().cloned().collect()))
        .collect()
}

pub fn write_verdicts(path: &Path, verdicts: &Verdicts) -> Result<()> {
    let records: Vec<VerdictRecord> = verdicts
        .iter()
        .map(|(&claim_id, v)| VerdictRecord {
            claim_id,
            predicted_label: v.label,
            predicted_evidence: v.evidence.iter().map(|id| (id.page_id.clone(), id.line)).collect(),
        })
        .collect();
    jsonl::write_records(path, &records)
}

pub fn read_verdicts(path: &Path) -> Result<Verdicts> {
    Ok(jsonl::read_records::<VerdictRecord>(path)?
        .into_iter()
        .map(|r| {
            let evidence = r
                .predicted_evidence
                .into_iter()
                .map(|(p, l)| SentenceId::new(p, l))
                .collect();
            (
                r.claim_id,
                Verdict {
                    label: r.predicted_label,
                    evidence,
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_line_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sel.jsonl");
        let sel = BTreeMap::from([(
            4u64,
            RankedEvidence {
                items: vec![(SentenceId::new("BBC", 2), 0.75)],
            },
        )]);
        write_selections(&path, &sel).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert_eq!(body, "{\"claim_id\":4,\"evidence\":[[\"BBC\",2,0.75]]}\n");
        assert_eq!(read_selections(&path).unwrap(), sel);
    }

    #[test]
    fn verdict_line_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.jsonl");
        let v = Verdicts::from([(
            1u64,
            Verdict {
                label: Label::NotEnoughInfo,
                evidence: vec![SentenceId::new("A", 0)],
            },
        )]);
        write_verdicts(&path, &v).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            body,
            "{\"claim_id\":1,\"predicted_label\":\"NOT ENOUGH INFO\",\"predicted_evidence\":[[\"A\",0]]}\n"
        );
        assert_eq!(read_verdicts(&path).unwrap(), v);
    }
}
