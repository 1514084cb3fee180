//! Tokenized document collections.
//!
//! Corpora are stored as JSON Lines, one document per line:
//!
//! ```text
//! {"id": "doc-1", "sentences": [{"raw": "a b", "tokens": ["a", "b"]}]}
//! ```
//!
//! Tokens are compared byte-exact; nothing is lowercased or normalized.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rhetorical role of a sentence within its document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiscourseTag {
    Introduction,
    Prompt,
    Conclusion,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sentence {
    pub doc_id: String,
    /// Position within the document.
    pub index: usize,
    pub tokens: Vec<String>,
    /// Original surface string, kept verbatim.
    pub raw: String,
    pub tag: Option<DiscourseTag>,
}

impl Sentence {
    /// Identity of the sentence inside its corpus.
    pub fn key(&self) -> (&str, usize) {
        (&self.doc_id, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// Builds a document from `(raw, tokens)` pairs, assigning indices in order.
    pub fn new<I, S>(id: impl Into<String>, sentences: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<String>)>,
        S: Into<String>,
    {
        let id = id.into();
        let mut out = Vec::new();
        for (index, (raw, tokens)) in sentences.into_iter().enumerate() {
            if tokens.is_empty() {
                return Err(Error::Validation(format!(
                    "document {id}: sentence {index} has no tokens"
                )));
            }
            out.push(Sentence {
                doc_id: id.clone(),
                index,
                tokens,
                raw: raw.into(),
                tag: None,
            });
        }
        Ok(Document { id, sentences: out })
    }

    /// Convenience constructor: each sentence is whitespace-split into tokens.
    pub fn from_texts(id: impl Into<String>, texts: &[&str]) -> Result<Self> {
        Document::new(
            id,
            texts
                .iter()
                .map(|t| (t.to_string(), t.split_whitespace().map(str::to_owned).collect())),
        )
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct SentenceRecord {
    raw: String,
    tokens: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct DocumentRecord {
    id: String,
    sentences: Vec<SentenceRecord>,
}

impl Corpus {
    /// Validates the documents and computes the vocabulary.
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut vocabulary = BTreeMap::new();
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::Validation(format!("duplicate document id {:?}", doc.id)));
            }
            for (i, s) in doc.sentences.iter().enumerate() {
                if s.index != i || s.doc_id != doc.id {
                    return Err(Error::Validation(format!(
                        "document {}: sentence at position {i} is labelled {}#{}",
                        doc.id, s.doc_id, s.index
                    )));
                }
                if s.tokens.is_empty() {
                    return Err(Error::Validation(format!(
                        "document {}: sentence {i} has no tokens",
                        doc.id
                    )));
                }
                for t in &s.tokens {
                    *vocabulary.entry(t.clone()).or_insert(0) += 1;
                }
            }
        }
        Ok(Corpus {
            documents,
            vocabulary,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    /// Token → total occurrence count.
    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn num_sentences(&self) -> usize {
        self.documents.iter().map(Document::len).sum()
    }

    pub fn num_tokens(&self) -> usize {
        self.vocabulary.values().sum()
    }

    /// Returns a copy with every document tagged by [`tag_discourse`](crate::selection::tag_discourse).
    pub fn tagged(&self) -> Corpus {
        Corpus {
            documents: self
                .documents
                .iter()
                .map(crate::selection::tag_discourse)
                .collect(),
            vocabulary: self.vocabulary.clone(),
        }
    }

    /// Reads a JSON Lines corpus. Blank lines are skipped.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut documents = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in reader.lines().enumerate() {
            let lineno = n + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: DocumentRecord =
                serde_json::from_str(&line).map_err(|e| Error::parse(lineno, e.to_string()))?;
            if !seen.insert(record.id.clone()) {
                return Err(Error::Validation(format!(
                    "duplicate document id {:?} at line {lineno}",
                    record.id
                )));
            }
            if let Some(i) = record.sentences.iter().position(|s| s.tokens.is_empty()) {
                return Err(Error::parse(lineno, format!("sentence {i} has an empty token list")));
            }
            let doc = Document::new(
                record.id,
                record.sentences.into_iter().map(|s| (s.raw, s.tokens)),
            )?;
            documents.push(doc);
        }
        Corpus::new(documents)
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for doc in &self.documents {
            let record = DocumentRecord {
                id: doc.id.clone(),
                sentences: doc
                    .sentences
                    .iter()
                    .map(|s| SentenceRecord {
                        raw: s.raw.clone(),
                        tokens: s.tokens.clone(),
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut writer, &record)?;
            writer.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_jsonl(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Splits by document into `(train, holdout)`.
    ///
    /// The holdout holds `round(fraction * N)` documents, clamped to `[1, N-1]`.
    /// Both halves keep the original relative document order.
    pub fn split_holdout(&self, fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
        let n = self.documents.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "holdout split needs at least 2 documents, corpus has {n}"
            )));
        }
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "holdout fraction must lie in (0, 1), got {fraction}"
            )));
        }
        let size = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut in_holdout = vec![false; n];
        for &i in &order[..size] {
            in_holdout[i] = true;
        }
        let (mut train, mut holdout) = (Vec::new(), Vec::new());
        for (doc, held) in self.documents.iter().zip(in_holdout) {
            if held {
                holdout.push(doc.clone());
            } else {
                train.push(doc.clone());
            }
        }
        Ok((Corpus::new(train)?, Corpus::new(holdout)?))
    }
}

/// Reads a JSON Lines corpus from disk.
pub fn ingest_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::read_jsonl(BufReader::new(file))
}
