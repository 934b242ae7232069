//! Entity linking and adversarial false-claim generation.
//!
//! A supported claim with two or more linked entities yields one refuted
//! claim: the second mention (by position) is replaced with the canonical
//! name of a sibling entity, and the original evidence is kept as the
//! refuting evidence.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::claims::{Claim, ClaimRecord, EvidenceGroup, Label};
use crate::error::Result;
use crate::jsonl;
use crate::kb::KnowledgeBase;
use crate::rng::{derive_seed, seeded};
use crate::text::raw_tokens;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub entity_id: String,
    /// Character offsets into the claim, `end` exclusive.
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

pub trait EntityLinker {
    /// Non-overlapping mentions ordered by start offset.
    fn link(&self, text: &str) -> Vec<EntityMention>;
}

/// Longest-match alias dictionary, case-sensitive, aligned on token
/// boundaries.
#[derive(Debug, Clone)]
pub struct AliasLinker {
    /// first raw token → (alias, entity id), longest alias first
    by_first_token: HashMap<String, Vec<(String, String)>>,
}

impl AliasLinker {
    pub fn new(kb: &KnowledgeBase) -> Self {
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for e in kb.entities() {
            for a in &e.aliases {
                // entities iterate in id order, so the first owner is the lowest id
                owner.entry(a.as_str()).or_insert(e.entity_id.as_str());
            }
        }
        let mut by_first_token: HashMap<String, Vec<(String, String)>> = HashMap::new();
        for (alias, id) in owner {
            let Some((0, first)) = raw_tokens(alias).next() else {
                continue;
            };
            by_first_token
                .entry(first.to_string())
                .or_default()
                .push((alias.to_string(), id.to_string()));
        }
        for v in by_first_token.values_mut() {
            v.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        }
        AliasLinker { by_first_token }
    }
}

impl EntityLinker for AliasLinker {
    fn link(&self, text: &str) -> Vec<EntityMention> {
        let mut mentions = Vec::new();
        let mut covered_to = 0usize;
        for (start, tok) in raw_tokens(text) {
            if start < covered_to {
                continue;
            }
            let Some(candidates) = self.by_first_token.get(tok) else {
                continue;
            };
            let rest = &text[start..];
            let hit = candidates.iter().find(|(alias, _)| {
                rest.starts_with(alias.as_str())
                    && !rest[alias.len()..].chars().next().is_some_and(char::is_alphanumeric)
            });
            if let Some((alias, id)) = hit {
                let end = start + alias.len();
                let char_start = text[..start].chars().count();
                mentions.push(EntityMention {
                    entity_id: id.clone(),
                    start: char_start,
                    end: char_start + alias.chars().count(),
                    surface: alias.clone(),
                });
                covered_to = end;
            }
        }
        mentions
    }
}

pub fn link_entities(claim_text: &str, kb: &KnowledgeBase) -> Vec<EntityMention> {
    AliasLinker::new(kb).link(claim_text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticClaim {
    pub text: String,
    pub source_claim_id: u64,
    pub replaced_entity_id: String,
    pub replacement_entity_id: String,
    pub evidence_groups: Vec<EvidenceGroup>,
}

impl SyntheticClaim {
    pub const LABEL: Label = Label::Refuted;

    /// The synthetic claim as an ordinary claim; it reuses the source id.
    pub fn to_claim(&self) -> Claim {
        Claim {
            id: self.source_claim_id,
            label: Self::LABEL,
            text: self.text.clone(),
            evidence: self.evidence_groups.clone(),
        }
    }
}

/// Byte range of the character span `[start, end)`.
fn byte_span(text: &str, start: usize, end: usize) -> (usize, usize) {
    let mut offsets = text.char_indices().map(|(b, _)| b).chain([text.len()]);
    let b0 = offsets.nth(start).unwrap_or(text.len());
    let b1 = if end > start {
        offsets.nth(end - start - 1).unwrap_or(text.len())
    } else {
        b0
    };
    (b0, b1)
}

/// Claim generation over a knowledge base with a pluggable linker.
pub struct ClaimGenerator<'a, L: EntityLinker> {
    kb: &'a KnowledgeBase,
    linker: L,
}

impl<'a> ClaimGenerator<'a, AliasLinker> {
    pub fn new(kb: &'a KnowledgeBase) -> Self {
        ClaimGenerator {
            kb,
            linker: AliasLinker::new(kb),
        }
    }
}

impl<'a, L: EntityLinker> ClaimGenerator<'a, L> {
    pub fn with_linker(kb: &'a KnowledgeBase, linker: L) -> Self {
        ClaimGenerator { kb, linker }
    }

    pub fn linker(&self) -> &L {
        &self.linker
    }

    pub fn false_claim(&self, claim: &Claim, seed: u64) -> Option<SyntheticClaim> {
        if claim.label != Label::Supported {
            return None;
        }
        let mentions = self.linker.link(&claim.text);
        let target = mentions.get(1)?;
        let siblings: Vec<String> = self
            .kb
            .siblings(&target.entity_id)
            .ok()?
            .into_iter()
            .filter(|s| self.kb.get(s).is_some_and(|e| e.canonical_name != target.surface))
            .collect();
        if siblings.is_empty() {
            return None;
        }
        let pick = &siblings[seeded(seed).gen_range(0..siblings.len())];
        let name = &self.kb.get(pick)?.canonical_name;
        let (b0, b1) = byte_span(&claim.text, target.start, target.end);
        let text = format!("{}{}{}", &claim.text[..b0], name, &claim.text[b1..]);
        Some(SyntheticClaim {
            text,
            source_claim_id: claim.id,
            replaced_entity_id: target.entity_id.clone(),
            replacement_entity_id: pick.clone(),
            evidence_groups: claim.evidence.clone(),
        })
    }

    pub fn augmentation_set(&self, claims: &[Claim], seed: u64) -> Vec<SyntheticClaim> {
        claims
            .iter()
            .filter_map(|c| self.false_claim(c, derive_seed(seed, c.id)))
            .collect()
    }
}

pub fn generate_false_claim(claim: &Claim, kb: &KnowledgeBase, rng_seed: u64) -> Option<SyntheticClaim> {
    ClaimGenerator::new(kb).false_claim(claim, rng_seed)
}

pub fn generate_augmentation_set(claims: &[Claim], kb: &KnowledgeBase, seed: u64) -> Vec<SyntheticClaim> {
    ClaimGenerator::new(kb).augmentation_set(claims, seed)
}

pub fn write_synthetic_claims(path: &std::path::Path, claims: &[SyntheticClaim]) -> Result<()> {
    let records: Vec<ClaimRecord> = claims
        .iter()
        .map(|s| {
            let mut r = ClaimRecord::from_claim(&s.to_claim());
            r.source_claim_id = Some(s.source_claim_id);
            r.replaced = Some(s.replaced_entity_id.clone());
            r.replacement = Some(s.replacement_entity_id.clone());
            r
        })
        .collect();
    jsonl::write_records(path, &records)
}

pub fn load_synthetic_claims(path: &std::path::Path) -> Result<Vec<SyntheticClaim>> {
    let records: Vec<ClaimRecord> = jsonl::read_records(path)?;
    Ok(records
        .into_iter()
        .map(|r| {
            let source = r.source_claim_id.unwrap_or(r.id);
            let replaced = r.replaced.clone().unwrap_or_default();
            let replacement = r.replacement.clone().unwrap_or_default();
            let claim = r.into_claim();
            SyntheticClaim {
                text: claim.text,
                source_claim_id: source,
                replaced_entity_id: replaced,
                replacement_entity_id: replacement,
                evidence_groups: claim.evidence,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentenceId;
    use crate::kb::EntityRecord;

    fn kb() -> KnowledgeBase {
        KnowledgeBase::from_records([
            EntityRecord::new("Q10", "Johnny Galecki").with_parents(&["actor"]),
            EntityRecord::new("Q11", "The Big Bang Theory").with_parents(&["sitcom"]),
            EntityRecord::new("Q12", "Friends").with_parents(&["sitcom"]),
            EntityRecord::new("Q13", "CBS").with_parents(&["network"]),
            EntityRecord::new("Q14", "Big Bang").with_parents(&["event"]),
            EntityRecord::new("Q20", "Stan Beeman").with_parents(&["character"]),
            EntityRecord::new("Q21", "BBC").with_parents(&["network"]),
            EntityRecord::new("Q30", "Lonely Show"),
        ])
        .unwrap()
    }

    fn supported(text: &str) -> Claim {
        Claim {
            id: 3,
            label: Label::Supported,
            text: text.into(),
            evidence: vec![vec![SentenceId::new("Johnny Galecki", 1)]],
        }
    }

    #[test]
    fn links_in_positional_order() {
        let m = link_entities("Stan Beeman is only in shows on BBC.", &kb());
        let ids: Vec<_> = m.iter().map(|m| m.entity_id.as_str()).collect();
        assert_eq!(ids, ["Q20", "Q21"]);
        assert_eq!((m[0].start, m[0].end), (0, 11));
        assert_eq!((m[1].start, m[1].end), (32, 35));
        assert_eq!(m[1].surface, "BBC");
    }

    #[test]
    fn longest_alias_wins() {
        let m = link_entities("Johnny Galecki acted in The Big Bang Theory on CBS.", &kb());
        let ids: Vec<_> = m.iter().map(|m| m.entity_id.as_str()).collect();
        assert_eq!(ids, ["Q10", "Q11", "Q13"]);
    }

    #[test]
    fn matching_is_case_sensitive_and_token_aligned() {
        let kb = kb();
        assert!(link_entities("the bbc and cbs", &kb).is_empty());
        assert!(link_entities("BBCs and CBSX", &kb).is_empty());
        assert!(link_entities("nothing to see here", &kb).is_empty());
    }

    #[test]
    fn alias_collision_goes_to_lowest_id() {
        let kb = KnowledgeBase::from_records([
            EntityRecord::new("Q9", "Mercury").with_aliases(&["Hg"]),
            EntityRecord::new("Q2", "Freddie").with_aliases(&["Mercury"]),
        ])
        .unwrap();
        assert_eq!(link_entities("Mercury rising", &kb)[0].entity_id, "Q2");
    }

    #[test]
    fn replaces_second_entity_with_sibling() {
        let claim = supported("Johnny Galecki acted in The Big Bang Theory on CBS.");
        let s = generate_false_claim(&claim, &kb(), 1).unwrap();
        assert_eq!(s.text, "Johnny Galecki acted in Friends on CBS.");
        assert_eq!(s.replaced_entity_id, "Q11");
        assert_eq!(s.replacement_entity_id, "Q12");
        assert_eq!(s.evidence_groups, claim.evidence);
        assert_eq!(s.to_claim().label, Label::Refuted);
    }

    #[test]
    fn degenerate_claims_yield_nothing() {
        let kb = kb();
        assert!(generate_false_claim(&supported("Johnny Galecki is an actor."), &kb, 1).is_none());
        assert!(generate_false_claim(&supported("Johnny Galecki made Lonely Show."), &kb, 1).is_none());
        let mut refuted = supported("Johnny Galecki acted in The Big Bang Theory on CBS.");
        refuted.label = Label::Refuted;
        assert!(generate_false_claim(&refuted, &kb, 1).is_none());
    }

    #[test]
    fn non_ascii_offsets_are_characters() {
        let kb = KnowledgeBase::from_records([
            EntityRecord::new("A", "Zoë Kravitz").with_parents(&["p"]),
            EntityRecord::new("B", "Señor Show").with_parents(&["s"]),
            EntityRecord::new("C", "Other Show").with_parents(&["s"]),
        ])
        .unwrap();
        let claim = supported("Zoë Kravitz starred in Señor Show.");
        let m = link_entities(&claim.text, &kb);
        let chars: Vec<char> = claim.text.chars().collect();
        for mention in &m {
            let s: String = chars[mention.start..mention.end].iter().collect();
            assert_eq!(s, mention.surface);
        }
        let s = generate_false_claim(&claim, &kb, 0).unwrap();
        assert_eq!(s.text, "Zoë Kravitz starred in Other Show.");
    }

    #[test]
    fn augmentation_is_deterministic_and_ordered() {
        let kb = kb();
        let mut claims = Vec::new();
        for (i, text) in [
            "Johnny Galecki acted in The Big Bang Theory on CBS.",
            "Johnny Galecki is an actor.",
            "Stan Beeman appeared on CBS.",
        ]
        .iter()
        .enumerate()
        {
            let mut c = supported(text);
            c.id = i as u64;
            claims.push(c);
        }
        let a = generate_augmentation_set(&claims, &kb, 5);
        assert_eq!(a, generate_augmentation_set(&claims, &kb, 5));
        let sources: Vec<u64> = a.iter().map(|s| s.source_claim_id).collect();
        assert_eq!(sources, [0, 2]);
        assert_eq!(a[1].text, "Stan Beeman appeared on BBC.");
        assert!(generate_augmentation_set(&[], &kb, 5).is_empty());
    }
}
