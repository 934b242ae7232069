//! Local knowledge base of entities with aliases, parent links and relation
//! edges. One JSON object per line:
//! `{"id", "name", "aliases": [...], "parents": [...], "relations": [...]}`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    #[serde(rename = "id")]
    pub entity_id: String,
    #[serde(rename = "name")]
    pub canonical_name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default, rename = "parents")]
    pub parent_ids: Vec<String>,
    #[serde(default, rename = "relations")]
    pub relation_ids: Vec<String>,
}

impl EntityRecord {
    pub fn new(id: &str, name: &str) -> Self {
        EntityRecord {
            entity_id: id.to_string(),
            canonical_name: name.to_string(),
            aliases: vec![name.to_string()],
            parent_ids: Vec::new(),
            relation_ids: Vec::new(),
        }
    }

    pub fn with_parents(mut self, parents: &[&str]) -> Self {
        self.parent_ids = parents.iter().map(|p| p.to_string()).collect();
        self
    }

    pub fn with_relations(mut self, relations: &[&str]) -> Self {
        self.relation_ids = relations.iter().map(|p| p.to_string()).collect();
        self
    }

    pub fn with_aliases(mut self, aliases: &[&str]) -> Self {
        self.aliases.extend(aliases.iter().map(|a| a.to_string()));
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    entities: BTreeMap<String, EntityRecord>,
    /// parent id → children
    children: BTreeMap<String, BTreeSet<String>>,
}

impl KnowledgeBase {
    pub fn from_records(records: impl IntoIterator<Item = EntityRecord>) -> Result<Self> {
        let mut kb = KnowledgeBase::default();
        for mut rec in records {
            if rec.canonical_name.trim().is_empty() {
                return Err(Error::Config(format!("entity `{}` has an empty name", rec.entity_id)));
            }
            if rec.parent_ids.contains(&rec.entity_id) || rec.relation_ids.contains(&rec.entity_id) {
                return Err(Error::Config(format!("entity `{}` links to itself", rec.entity_id)));
            }
            if kb.entities.contains_key(&rec.entity_id) {
                return Err(Error::DuplicateEntity(rec.entity_id));
            }
            if !rec.aliases.contains(&rec.canonical_name) {
                rec.aliases.insert(0, rec.canonical_name.clone());
            }
            for p in &rec.parent_ids {
                kb.children.entry(p.clone()).or_default().insert(rec.entity_id.clone());
            }
            kb.entities.insert(rec.entity_id.clone(), rec);
        }
        Ok(kb)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_records(jsonl::read_records::<EntityRecord>(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let records: Vec<&EntityRecord> = self.entities.values().collect();
        jsonl::write_records(path, &records)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EntityRecord> {
        self.entities.get(id)
    }

    pub fn entity(&self, id: &str) -> Result<&EntityRecord> {
        self.get(id).ok_or_else(|| Error::UnknownEntity(id.to_string()))
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityRecord> {
        self.entities.values()
    }

    /// Entities other than `id` sharing at least one parent with it.
    pub fn siblings(&self, id: &str) -> Result<BTreeSet<String>> {
        let entity = self.entity(id)?;
        let mut out = BTreeSet::new();
        for p in &entity.parent_ids {
            if let Some(kids) = self.children.get(p) {
                out.extend(kids.iter().filter(|k| k.as_str() != id).cloned());
            }
        }
        Ok(out)
    }

    /// Whether a relation edge joins the two entities in either direction.
    pub fn directly_related(&self, a: &str, b: &str) -> Result<bool> {
        let ea = self.entity(a)?;
        let eb = self.entity(b)?;
        Ok(ea.relation_ids.iter().any(|r| r == b) || eb.relation_ids.iter().any(|r| r == a))
    }
}

pub fn siblings(entity_id: &str, kb: &KnowledgeBase) -> Result<BTreeSet<String>> {
    kb.siblings(entity_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb() -> KnowledgeBase {
        KnowledgeBase::from_records([
            EntityRecord::new("Q1", "The Big Bang Theory").with_parents(&["sitcom"]),
            EntityRecord::new("Q2", "Friends").with_parents(&["sitcom"]),
            EntityRecord::new("Q3", "CBS")
                .with_parents(&["network"])
                .with_relations(&["Q1"]),
            EntityRecord::new("Q4", "Orphan"),
            EntityRecord::new("Q5", "Only Child").with_parents(&["lonely"]),
        ])
        .unwrap()
    }

    #[test]
    fn sitcoms_are_siblings() {
        let kb = kb();
        assert_eq!(kb.siblings("Q1").unwrap(), BTreeSet::from(["Q2".to_string()]));
        assert_eq!(kb.siblings("Q2").unwrap(), BTreeSet::from(["Q1".to_string()]));
        assert!(kb.siblings("Q4").unwrap().is_empty());
        assert!(kb.siblings("Q5").unwrap().is_empty());
        assert!(matches!(kb.siblings("Q99"), Err(Error::UnknownEntity(id)) if id == "Q99"));
    }

    #[test]
    fn relatedness_is_direction_agnostic() {
        let kb = kb();
        assert!(kb.directly_related("Q3", "Q1").unwrap());
        assert!(kb.directly_related("Q1", "Q3").unwrap());
        assert!(!kb.directly_related("Q1", "Q2").unwrap());
        assert!(kb.directly_related("Q1", "Q42").is_err());
    }

    #[test]
    fn canonical_name_is_an_alias() {
        let kb = kb();
        assert_eq!(kb.get("Q2").unwrap().aliases, vec!["Friends"]);
    }

    #[test]
    fn invalid_records_rejected() {
        assert!(KnowledgeBase::from_records([EntityRecord::new("Q1", "A"), EntityRecord::new("Q1", "B")]).is_err());
        assert!(KnowledgeBase::from_records([EntityRecord::new("Q1", "A").with_parents(&["Q1"])]).is_err());
        assert!(KnowledgeBase::from_records([EntityRecord::new("Q1", " ")]).is_err());
    }

    #[test]
    fn parses_kb_line() {
        let rec: EntityRecord = serde_json::from_str(
            r#"{"id":"Q5","name":"BBC","aliases":["BBC","British Broadcasting Corporation"],"parents":["broadcaster"],"relations":[]}"#,
        )
        .unwrap();
        assert_eq!(rec.entity_id, "Q5");
        assert_eq!(rec.aliases.len(), 2);
    }
}
