//! Word vectors: storage, similarity queries, averaging and word2vec text I/O.

mod skipgram;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

pub use skipgram::{sgns_loss_and_grad, train_skipgram, SgnsGrad, SkipgramConfig};

/// Cosine similarity. Errors on length mismatch or an all-zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Dense word → vector table. Words keep their insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    /// Builds a table from `(word, vector)` pairs.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut iter = pairs.into_iter().peekable();
        let dim = iter.peek().map(|(_, v)| v.len()).ok_or_else(|| {
            Error::InvalidArgument("embedding table needs at least one word".into())
        })?;
        let mut table = EmbeddingTable::new(dim)?;
        for (w, v) in iter {
            table.insert(w, v)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let word = word.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if self.index.contains_key(&word) {
            return Err(Error::Validation(format!("duplicate embedding for {word:?}")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Like [`get`](Self::get) but an unknown word is an error.
    pub fn vector(&self, word: &str) -> Result<&[f64]> {
        self.get(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))
    }

    /// Top-`k` words by cosine to `word`, excluding `word` itself.
    ///
    /// Sorted by similarity descending, then word ascending. Words whose vector
    /// is all zero have no cosine and are skipped.
    pub fn nearest_neighbors(&self, word: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let query = self.vector(word)?;
        let mut scored = Vec::with_capacity(self.len());
        for (i, w) in self.words.iter().enumerate() {
            if w == word {
                continue;
            }
            let v = &self.data[i * self.dim..(i + 1) * self.dim];
            match cosine(query, v) {
                Ok(sim) => scored.push((w.clone(), sim)),
                Err(Error::ZeroVector) if norm(query) > 0.0 => continue,
                Err(e) => return Err(e),
            }
        }
        sort_scored(&mut scored);
        scored.truncate(k);
        Ok(scored)
    }

    /// Component-wise mean over the in-vocabulary words; unknown words are skipped.
    pub fn average<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<f64>> {
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for w in words {
            if let Some(v) = self.get(w.as_ref()) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::AllOutOfVocabulary(
                words.iter().map(|w| w.as_ref().to_owned()).collect(),
            ));
        }
        let inv = 1.0 / n as f64;
        Ok(sum.into_iter().map(|s| s * inv).collect())
    }

    /// Writes the word2vec text format: `"<vocab> <dim>"` then one row per word.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<writer>", e);
        writeln!(w, "{} {}", self.len(), self.dim).map_err(io)?;
        for (i, word) in self.words.iter().enumerate() {
            write!(w, "{word}").map_err(io)?;
            for x in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {x}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (vocab, dim) = match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(|e| Error::parse(1, e.to_string()))?;
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 2 {
                    return Err(Error::parse(1, "header must be \"<vocab_size> <dim>\""));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|e| Error::parse(1, format!("bad header field {s:?}: {e}")))
                };
                (parse(fields[0])?, parse(fields[1])?)
            }
            None => return Err(Error::parse(1, "missing header")),
        };
        let mut table = EmbeddingTable::new(dim).map_err(|e| Error::parse(1, e.to_string()))?;
        for (n, line) in lines {
            let lineno = n + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let word = fields.next().unwrap_or_default();
            let values = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::parse(lineno, format!("bad value {f:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != dim {
                return Err(Error::parse(
                    lineno,
                    format!("expected {dim} values for {word:?}, found {}", values.len()),
                ));
            }
            table
                .insert(word, values)
                .map_err(|e| Error::parse(lineno, e.to_string()))?;
        }
        if table.len() != vocab {
            return Err(Error::parse(
                1,
                format!("header declares {vocab} words, file has {}", table.len()),
            ));
        }
        if table.is_empty() {
            return Err(Error::parse(1, "embedding table is empty"));
        }
        Ok(table)
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingTable::read_text(BufReader::new(file))
}

pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    table.write_text(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Sorts `(word, score)` by score descending, then word ascending.
pub(crate) fn sort_scored(items: &mut [(String, f64)]) {
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}
