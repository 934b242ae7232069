//! Wikipedia-style page dump: ingestion, lookup and re-serialization.
//!
//! The dump is JSON-lines, one page per line: `{"id": <title>, "lines": <text>}`.
//! `lines` holds newline-separated entries of the form
//! `<index>\t<sentence>[\t<anchor>...]`; anchor fields are dropped on load.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Address of one sentence: page title plus line index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SentenceId {
    pub page_id: String,
    pub line: u32,
}

impl SentenceId {
    pub fn new(page_id: impl Into<String>, line: u32) -> Self {
        SentenceId {
            page_id: page_id.into(),
            line,
        }
    }
}

impl fmt::Display for SentenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.page_id, self.line)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub line: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub page_id: String,
    /// Sorted by strictly increasing `line`. Blank sentences are kept.
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(page_id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Document {
            page_id: page_id.into(),
            sentences,
        }
    }

    /// Builds a document from plain sentence texts numbered from zero.
    pub fn from_texts<S: AsRef<str>>(page_id: impl Into<String>, texts: &[S]) -> Self {
        let sentences = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Sentence {
                line: i as u32,
                text: t.as_ref().to_string(),
            })
            .collect();
        Document::new(page_id, sentences)
    }

    pub fn sentence(&self, line: u32) -> Option<&Sentence> {
        self.sentences
            .binary_search_by_key(&line, |s| s.line)
            .ok()
            .map(|i| &self.sentences[i])
    }

    /// Sentences eligible as retrieval candidates (non-blank).
    pub fn candidates(&self) -> impl Iterator<Item = &Sentence> {
        self.sentences.iter().filter(|s| !s.text.trim().is_empty())
    }

    /// Position of `line` among this page's sentences, scaled to `[0, 1)`.
    pub fn relative_position(&self, line: u32) -> f64 {
        let n = self.sentences.len().max(1);
        let ordinal = self.sentences.partition_point(|s| s.line < line);
        ordinal as f64 / n as f64
    }

    /// Parses the `lines` field of a dump record. Bad entries are skipped.
    pub fn parse(page_id: &str, lines: &str) -> Self {
        let mut sentences: Vec<Sentence> = Vec::new();
        for entry in lines.split('\n') {
            if entry.is_empty() {
                continue;
            }
            let mut fields = entry.split('\t');
            let index = fields.next().unwrap_or("");
            let line: u32 = match index.trim().parse() {
                Ok(v) => v,
                Err(_) => {
                    log::warn!("page `{page_id}`: skipping sentence entry with bad index {index:?}");
                    continue;
                }
            };
            if sentences.last().is_some_and(|s| s.line >= line) {
                log::warn!("page `{page_id}`: skipping out-of-order sentence index {line}");
                continue;
            }
            let text = fields.next().unwrap_or("").to_string();
            sentences.push(Sentence { line, text });
        }
        Document::new(page_id, sentences)
    }

    /// Dump record for this page, without anchor fields.
    pub fn to_dump_line(&self) -> String {
        let lines = self
            .sentences
            .iter()
            .map(|s| format!("{}\t{}", s.line, s.text))
            .collect::<Vec<_>>()
            .join("\n");
        serde_json::to_string(&DumpRecord {
            id: self.page_id.clone(),
            lines,
        })
        .expect("string fields always serialize")
    }
}

#[derive(Serialize, Deserialize)]
struct DumpRecord {
    id: String,
    lines: String,
}

/// Immutable collection of pages keyed by title.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    docs: BTreeMap<String, Document>,
}

impl Corpus {
    pub fn from_documents(docs: impl IntoIterator<Item = Document>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for doc in docs {
            if doc.page_id.is_empty() {
                return Err(Error::Config("page id must be nonempty".into()));
            }
            if map.contains_key(&doc.page_id) {
                return Err(Error::DuplicatePage(doc.page_id));
            }
            map.insert(doc.page_id.clone(), doc);
        }
        Ok(Corpus { docs: map })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, page_id: &str) -> Option<&Document> {
        self.docs.get(page_id)
    }

    pub fn contains(&self, page_id: &str) -> bool {
        self.docs.contains_key(page_id)
    }

    /// Pages in ascending title order.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.docs.values()
    }

    pub fn get_sentence(&self, id: &SentenceId) -> Option<&str> {
        self.get(&id.page_id)
            .and_then(|d| d.sentence(id.line))
            .map(|s| s.text.as_str())
    }

    pub fn sentence_count(&self) -> usize {
        self.docs.values().map(|d| d.sentences.len()).sum()
    }

    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for doc in self.documents() {
            out.push_str(&doc.to_dump_line());
            out.push('\n');
        }
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Loads a dump from a single file or from every regular file of a directory
/// (in name order).
pub fn ingest_corpus(path: &Path) -> Result<Corpus> {
    let files = dump_files(path)?;
    let mut docs = BTreeMap::new();
    for file in files {
        let reader = BufReader::new(fs::File::open(&file).map_err(|e| Error::io(&file, e))?);
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(&file, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: DumpRecord =
                serde_json::from_str(&line).map_err(|e| Error::format(&file, n + 1, e.to_string()))?;
            if record.id.is_empty() {
                return Err(Error::format(&file, n + 1, "empty page id"));
            }
            if docs.contains_key(&record.id) {
                return Err(Error::DuplicatePage(record.id));
            }
            let doc = Document::parse(&record.id, &record.lines);
            docs.insert(record.id, doc);
        }
    }
    Ok(Corpus { docs })
}

fn dump_files(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if !meta.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let entry = entry.map_err(|e| Error::io(path, e))?;
        let p = entry.path();
        if p.is_file() {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}
