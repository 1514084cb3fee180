//! Sentence retrieval for an argument, feedback word extraction, and
//! position-based discourse tagging.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DiscourseTag, Document, Sentence};
use crate::embedding::{cosine, sort_scored, EmbeddingTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    /// Number of distinct argument words present in the sentence.
    Counting,
    /// Cosine between averaged word vectors.
    Embedding,
}

impl std::str::FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counting" => Ok(SelectionMethod::Counting),
            "embedding" => Ok(SelectionMethod::Embedding),
            _ => Err(Error::Config(format!("unknown method {s:?} (counting, embedding)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSentence<'a> {
    pub sentence: &'a Sentence,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub method: SelectionMethod,
    pub top_k: usize,
    pub max_per_document: usize,
    pub min_sentence_tokens: usize,
    #[serde(default)]
    pub stopwords: HashSet<String>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            method: SelectionMethod::Counting,
            top_k: 8,
            max_per_document: 2,
            min_sentence_tokens: 1,
            stopwords: HashSet::new(),
        }
    }
}

/// Reads a stopword list: one token per line, blank lines ignored.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let w = line.trim();
        if !w.is_empty() {
            out.insert(w.to_owned());
        }
    }
    Ok(out)
}

/// Number of distinct members of `words` that occur in `tokens`.
pub fn count_matches(words: &[String], tokens: &[String]) -> usize {
    let present: HashSet<&str> = tokens.iter().map(String::as_str).collect();
    let distinct: HashSet<&str> = words.iter().map(String::as_str).collect();
    distinct.iter().filter(|w| present.contains(*w)).count()
}

/// Relevance of sentence `s` to the argument words `words`.
pub fn score_sentence(
    words: &[String],
    s: &Sentence,
    method: SelectionMethod,
    table: Option<&EmbeddingTable>,
) -> Result<f64> {
    if words.is_empty() {
        return Err(Error::InvalidArgument("argument word set is empty".into()));
    }
    match method {
        SelectionMethod::Counting => Ok(count_matches(words, &s.tokens) as f64),
        SelectionMethod::Embedding => {
            let table = table.ok_or_else(|| Error::Config("embedding selection needs word vectors".into()))?;
            let query = table.average(words)?;
            score_against(&query, s, table)
        }
    }
}

fn score_against(query: &[f64], s: &Sentence, table: &EmbeddingTable) -> Result<f64> {
    let sv = table.average(&s.tokens).map_err(|e| Error::Unscoreable {
        doc_id: s.doc_id.clone(),
        index: s.index,
        reason: e.to_string(),
    })?;
    cosine(query, &sv).map_err(|e| Error::Unscoreable {
        doc_id: s.doc_id.clone(),
        index: s.index,
        reason: e.to_string(),
    })
}

/// Ranks corpus sentences against `words`.
///
/// Sorted by score descending, then document id, then index. Repeated token
/// sequences keep only their first occurrence, no document contributes more
/// than `max_per_document` sentences, and at most `top_k` are returned.
pub fn select_sentences<'a>(
    words: &[String],
    corpus: &'a Corpus,
    config: &SelectionConfig,
    table: Option<&EmbeddingTable>,
) -> Result<Vec<ScoredSentence<'a>>> {
    select_sentences_excluding(words, corpus, config, table, &HashSet::new())
}

/// [`select_sentences`] skipping the sentences whose `(doc_id, index)` is in `exclude`.
pub fn select_sentences_excluding<'a>(
    words: &[String],
    corpus: &'a Corpus,
    config: &SelectionConfig,
    table: Option<&EmbeddingTable>,
    exclude: &HashSet<(String, usize)>,
) -> Result<Vec<ScoredSentence<'a>>> {
    if words.is_empty() || config.top_k == 0 {
        return Ok(Vec::new());
    }
    let query = match config.method {
        SelectionMethod::Counting => None,
        SelectionMethod::Embedding => {
            let table = table.ok_or_else(|| Error::Config("embedding selection needs word vectors".into()))?;
            match table.average(words) {
                Ok(q) => Some((q, table)),
                Err(Error::AllOutOfVocabulary(_)) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            }
        }
    };
    let distinct: HashSet<&str> = words.iter().map(String::as_str).collect();

    let mut scored = Vec::new();
    for s in corpus.sentences() {
        if s.tokens.len() < config.min_sentence_tokens
            || exclude.contains(&(s.doc_id.clone(), s.index))
        {
            continue;
        }
        let score = match &query {
            None => s.tokens.iter().map(String::as_str).collect::<HashSet<_>>().intersection(&distinct).count() as f64,
            Some((q, table)) => match score_against(q, s, table) {
                Ok(v) => v,
                Err(_) => continue,
            },
        };
        scored.push(ScoredSentence { sentence: s, score });
    }
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.sentence.doc_id.cmp(&b.sentence.doc_id))
            .then_with(|| a.sentence.index.cmp(&b.sentence.index))
    });

    let mut seen_tokens: HashSet<&[String]> = HashSet::new();
    let mut per_doc: HashMap<&str, usize> = HashMap::new();
    let mut out = Vec::with_capacity(config.top_k);
    for item in scored {
        if !seen_tokens.insert(item.sentence.tokens.as_slice()) {
            continue;
        }
        let n = per_doc.entry(item.sentence.doc_id.as_str()).or_insert(0);
        if *n >= config.max_per_document {
            continue;
        }
        *n += 1;
        out.push(item);
        if out.len() == config.top_k {
            break;
        }
    }
    Ok(out)
}

/// Ranks words from the selected sentences as new supporting words.
///
/// Candidates are the tokens of `sentences` that are neither in `words` nor
/// stopwords. Counting scores a candidate by its frequency in `sentences`;
/// embedding scores it by cosine to the average vector of `words`. Returns
/// the top `k` by score descending, then word.
pub fn feedback_expand(
    words: &[String],
    sentences: &[&Sentence],
    method: SelectionMethod,
    k: usize,
    table: Option<&EmbeddingTable>,
    stopwords: &HashSet<String>,
) -> Result<Vec<(String, f64)>> {
    if sentences.is_empty() {
        return Err(Error::InvalidArgument("feedback needs at least one selected sentence".into()));
    }
    let known: HashSet<&str> = words.iter().map(String::as_str).collect();
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for s in sentences {
        for t in &s.tokens {
            if !known.contains(t.as_str()) && !stopwords.contains(t) {
                *freq.entry(t).or_insert(0) += 1;
            }
        }
    }
    let mut scored: Vec<(String, f64)> = match method {
        SelectionMethod::Counting => freq.into_iter().map(|(w, c)| (w.to_owned(), c as f64)).collect(),
        SelectionMethod::Embedding => {
            let table = table.ok_or_else(|| Error::Config("embedding feedback needs word vectors".into()))?;
            let Ok(query) = table.average(words) else {
                return Ok(Vec::new());
            };
            freq.into_keys()
                .filter_map(|w| {
                    let v = table.get(w)?;
                    cosine(&query, v).ok().map(|c| (w.to_owned(), c))
                })
                .collect()
        }
    };
    sort_scored(&mut scored);
    scored.truncate(k);
    Ok(scored)
}

/// Tags sentence 0 as Introduction, the last as Conclusion and the rest as
/// Prompt. A single sentence is an Introduction.
pub fn tag_discourse(doc: &Document) -> Document {
    let n = doc.sentences.len();
    let mut out = doc.clone();
    for (i, s) in out.sentences.iter_mut().enumerate() {
        s.tag = Some(if i == 0 {
            DiscourseTag::Introduction
        } else if i + 1 == n {
            DiscourseTag::Conclusion
        } else {
            DiscourseTag::Prompt
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn sentence(tokens: &[&str]) -> Sentence {
        Sentence {
            doc_id: "d".into(),
            index: 0,
            tokens: strings(tokens),
            raw: tokens.join(" "),
            tag: None,
        }
    }

    #[test]
    fn counting_examples() {
        let w = strings(&["youth", "passion", "dream"]);
        let s = sentence(&["youth", "is", "passion"]);
        assert_eq!(score_sentence(&w, &s, SelectionMethod::Counting, None).unwrap(), 2.0);
        let s = sentence(&["youth", "youth"]);
        assert_eq!(score_sentence(&strings(&["youth"]), &s, SelectionMethod::Counting, None).unwrap(), 1.0);
    }

    #[test]
    fn embedding_self_similarity() {
        let t = EmbeddingTable::from_pairs([("a", vec![0.3, -2.0]), ("b", vec![1.0, 1.0])]).unwrap();
        let s = sentence(&["a"]);
        let v = score_sentence(&strings(&["a"]), &s, SelectionMethod::Embedding, Some(&t)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(score_sentence(&strings(&["zz"]), &s, SelectionMethod::Embedding, Some(&t)).is_err());
        assert!(score_sentence(&strings(&["a"]), &sentence(&["zz"]), SelectionMethod::Embedding, Some(&t)).is_err());
    }

    fn cfg(top_k: usize, max_per_document: usize) -> SelectionConfig {
        SelectionConfig { top_k, max_per_document, ..Default::default() }
    }

    #[test]
    fn selection_order_and_limits() {
        let c = Corpus::new(vec![Document::from_texts("d", &["a b", "c d", "a a"]).unwrap()]).unwrap();
        let out = select_sentences(&strings(&["a"]), &c, &cfg(3, 3), None).unwrap();
        let raws: Vec<_> = out.iter().map(|s| s.sentence.raw.as_str()).collect();
        assert_eq!(raws, ["a b", "a a", "c d"]);
        assert_eq!(out[2].score, 0.0);
        let out = select_sentences(&strings(&["a"]), &c, &cfg(1, 3), None).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].sentence.raw, "a b");
    }

    #[test]
    fn per_document_cap_promotes_next_document() {
        let c = Corpus::new(vec![
            Document::from_texts("d1", &["a b", "a c", "x"]).unwrap(),
            Document::from_texts("d2", &["y", "q a"]).unwrap(),
        ])
        .unwrap();
        let out = select_sentences(&strings(&["a"]), &c, &cfg(2, 1), None).unwrap();
        let keys: Vec<_> = out.iter().map(|s| s.sentence.key()).collect();
        assert_eq!(keys, [("d1", 0), ("d2", 1)]);
    }

    #[test]
    fn duplicate_token_sequences_collapse() {
        let c = Corpus::new(vec![
            Document::from_texts("d1", &["a b"]).unwrap(),
            Document::from_texts("d2", &["a b", "a"]).unwrap(),
        ])
        .unwrap();
        let out = select_sentences(&strings(&["a"]), &c, &cfg(5, 5), None).unwrap();
        let keys: Vec<_> = out.iter().map(|s| s.sentence.key()).collect();
        assert_eq!(keys, [("d1", 0), ("d2", 1)]);
    }

    #[test]
    fn feedback_counting() {
        let s1 = sentence(&["a", "b", "b"]);
        let s2 = sentence(&["b", "c"]);
        let none = HashSet::new();
        let out = feedback_expand(&strings(&["a"]), &[&s1, &s2], SelectionMethod::Counting, 1, None, &none).unwrap();
        assert_eq!(out, vec![("b".to_owned(), 3.0)]);
        let out = feedback_expand(&strings(&["a"]), &[&s1, &s2], SelectionMethod::Counting, 10, None, &none).unwrap();
        assert_eq!(out.len(), 2);
        let out = feedback_expand(&strings(&["a", "b", "c"]), &[&s1, &s2], SelectionMethod::Counting, 10, None, &none).unwrap();
        assert!(out.is_empty());
        let stop = HashSet::from(["b".to_owned()]);
        let out = feedback_expand(&strings(&["a"]), &[&s1, &s2], SelectionMethod::Counting, 10, None, &stop).unwrap();
        assert_eq!(out, vec![("c".to_owned(), 1.0)]);
    }

    #[test]
    fn feedback_embedding() {
        let t = EmbeddingTable::from_pairs([
            ("a", vec![1.0, 0.0]),
            ("b", vec![0.9, 0.1]),
            ("c", vec![0.0, 1.0]),
        ])
        .unwrap();
        let s = sentence(&["a", "c", "b", "zz"]);
        let out = feedback_expand(&strings(&["a"]), &[&s], SelectionMethod::Embedding, 5, Some(&t), &HashSet::new()).unwrap();
        let words: Vec<_> = out.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(words, ["b", "c"]);
        let s = sentence(&["zz"]);
        let out = feedback_expand(&strings(&["a"]), &[&s], SelectionMethod::Embedding, 5, Some(&t), &HashSet::new()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn discourse_tags() {
        use DiscourseTag::*;
        let tags = |n: usize| {
            let texts: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            tag_discourse(&Document::from_texts("d", &refs).unwrap())
                .sentences
                .iter()
                .map(|s| s.tag.unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(tags(5), [Introduction, Prompt, Prompt, Prompt, Conclusion]);
        assert_eq!(tags(1), [Introduction]);
        assert_eq!(tags(2), [Introduction, Conclusion]);
    }

    fn vocab() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g"]).prop_map(str::to_owned)
    }

    proptest! {
        #[test]
        fn counting_bounds(w in prop::collection::vec(vocab(), 1..6), t in prop::collection::vec(vocab(), 1..8)) {
            let s = sentence(&t.iter().map(String::as_str).collect::<Vec<_>>());
            let score = score_sentence(&w, &s, SelectionMethod::Counting, None).unwrap();
            let mut distinct = w.clone();
            distinct.sort();
            distinct.dedup();
            prop_assert!(score <= distinct.len() as f64 && score <= t.len() as f64);
            let mut grown = w.clone();
            grown.push("never-seen".into());
            prop_assert_eq!(score_sentence(&grown, &s, SelectionMethod::Counting, None).unwrap(), score);
        }

        #[test]
        fn feedback_disjoint_and_monotone(
            w in prop::collection::vec(vocab(), 1..4),
            docs in prop::collection::vec(prop::collection::vec(prop::collection::vec(vocab(), 1..6), 1..4), 1..5),
            k in 1usize..5,
        ) {
            let docs: Vec<Document> = docs.into_iter().enumerate().map(|(i, sents)| {
                Document::new(format!("d{i}"), sents.into_iter().map(|t| (t.join(" "), t))).unwrap()
            }).collect();
            let corpus = Corpus::new(docs).unwrap();
            let config = cfg(4, 2);
            let selected = select_sentences(&w, &corpus, &config, None).unwrap();
            prop_assert!(selected.windows(2).all(|p| p[0].score >= p[1].score));
            let mut per_doc = HashMap::new();
            for s in &selected {
                *per_doc.entry(&s.sentence.doc_id).or_insert(0) += 1;
            }
            prop_assert!(per_doc.values().all(|&n| n <= 2));
            if selected.is_empty() {
                return Ok(());
            }
            let sents: Vec<&Sentence> = selected.iter().map(|s| s.sentence).collect();
            let new = feedback_expand(&w, &sents, SelectionMethod::Counting, k, None, &HashSet::new()).unwrap();
            prop_assert!(new.iter().all(|(x, _)| !w.contains(x)));
            let mut grown = w.clone();
            grown.extend(new.into_iter().map(|(x, _)| x));
            for s in &selected {
                let after = score_sentence(&grown, s.sentence, SelectionMethod::Counting, None).unwrap();
                prop_assert!(after >= s.score);
            }
        }
    }
}
