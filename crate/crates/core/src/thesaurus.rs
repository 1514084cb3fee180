//! Rule-based topic expansion over a synonym / antonym / hypernym resource.
//!
//! The resource is a TSV file with one relation per line, `head`, `relation`
//! (`syn`, `ant` or `hyper`) and `word` separated by tabs, for example
//! `happy<TAB>ant<TAB>sad`. Blank lines and lines starting with `#` are skipped.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Relations {
    pub synonyms: BTreeSet<String>,
    pub antonyms: BTreeSet<String>,
    pub hypernyms: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Synonym,
    Antonym,
    Hypernym,
}

impl Relation {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "syn" => Some(Relation::Synonym),
            "ant" => Some(Relation::Antonym),
            "hyper" => Some(Relation::Hypernym),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Thesaurus {
    entries: BTreeMap<String, Relations>,
}

/// The rule that produced a candidate word from a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Rule {
    Synonym,
    Hypernym,
    AntonymOfAntonym,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThesExpansionConfig {
    /// Propagation rounds; round 1 expands the topic itself.
    pub depth: usize,
    /// Candidates with fewer characters than this are dropped.
    pub min_token_length: usize,
    /// Minimum number of distinct (seed, rule) derivations.
    pub min_score: usize,
    pub max_words: usize,
}

impl Default for ThesExpansionConfig {
    fn default() -> Self {
        ThesExpansionConfig {
            depth: 2,
            min_token_length: 2,
            min_score: 1,
            max_words: 50,
        }
    }
}

impl Thesaurus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `head --relation--> word`. Self-relations are ignored.
    pub fn add(&mut self, head: &str, relation: Relation, word: &str) {
        if head == word {
            return;
        }
        let entry = self.entries.entry(head.to_owned()).or_default();
        let set = match relation {
            Relation::Synonym => &mut entry.synonyms,
            Relation::Antonym => &mut entry.antonyms,
            Relation::Hypernym => &mut entry.hypernyms,
        };
        set.insert(word.to_owned());
    }

    pub fn get(&self, word: &str) -> Option<&Relations> {
        self.entries.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the TSV resource. Blank lines and lines starting with `#` are skipped.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut t = Thesaurus::new();
        for (n, line) in reader.lines().enumerate() {
            let lineno = n + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    lineno,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            }
            let relation = Relation::parse(fields[1]).ok_or_else(|| {
                Error::parse(lineno, format!("unknown relation {:?}", fields[1]))
            })?;
            if fields[0].is_empty() || fields[2].is_empty() {
                return Err(Error::parse(lineno, "empty word"));
            }
            t.add(fields[0], relation, fields[2]);
        }
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Thesaurus::read_tsv(BufReader::new(file))
    }

    /// Expands `topic` by synonym, hypernym and antonym-of-antonym rules,
    /// feeding each round's new words back in as seeds.
    ///
    /// A word's score is the number of distinct `(seed, rule)` pairs that
    /// derive it across all rounds. Antonyms themselves are never emitted.
    /// Output is sorted by score descending, then word.
    pub fn expand(&self, topic: &str, config: &ThesExpansionConfig) -> Result<Vec<(String, usize)>> {
        if !self.contains(topic) {
            return Err(Error::OutOfVocabulary(topic.to_owned()));
        }
        if config.depth == 0 {
            return Err(Error::InvalidArgument("expansion depth must be at least 1".into()));
        }
        let mut derivations: HashSet<(String, Rule, String)> = HashSet::new();
        let mut scores: BTreeMap<String, usize> = BTreeMap::new();
        let mut expanded: HashSet<String> = HashSet::new();
        let mut seeds: BTreeSet<String> = BTreeSet::from([topic.to_owned()]);

        for _ in 0..config.depth {
            let mut next = BTreeSet::new();
            for seed in &seeds {
                expanded.insert(seed.clone());
                for (rule, word) in self.derive(seed) {
                    if word == seed || word == topic {
                        continue;
                    }
                    if derivations.insert((seed.clone(), rule, word.to_owned())) {
                        *scores.entry(word.to_owned()).or_insert(0) += 1;
                    }
                    if !expanded.contains(word) {
                        next.insert(word.to_owned());
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            seeds = next;
        }

        let mut out: Vec<(String, usize)> = scores
            .into_iter()
            .filter(|(w, s)| w.chars().count() >= config.min_token_length && *s >= config.min_score)
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out.truncate(config.max_words);
        Ok(out)
    }

    fn derive<'a>(&'a self, seed: &str) -> Vec<(Rule, &'a str)> {
        let Some(rel) = self.entries.get(seed) else {
            return Vec::new();
        };
        let mut out: Vec<(Rule, &str)> = rel
            .synonyms
            .iter()
            .map(|w| (Rule::Synonym, w.as_str()))
            .chain(rel.hypernyms.iter().map(|w| (Rule::Hypernym, w.as_str())))
            .collect();
        for ant in &rel.antonyms {
            if let Some(r) = self.entries.get(ant) {
                out.extend(r.antonyms.iter().map(|w| (Rule::AntonymOfAntonym, w.as_str())));
            }
        }
        out
    }
}

/// Free-function form of [`Thesaurus::expand`].
pub fn expand_thesaurus(
    thesaurus: &Thesaurus,
    topic: &str,
    config: &ThesExpansionConfig,
) -> Result<Vec<(String, usize)>> {
    thesaurus.expand(topic, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn happy() -> Thesaurus {
        Thesaurus::read_tsv(
            "happy\tsyn\tglad\nhappy\tant\tsad\nsad\tant\tjoyful\nglad\tsyn\tcheerful\n".as_bytes(),
        )
        .unwrap()
    }

    fn cfg(depth: usize) -> ThesExpansionConfig {
        ThesExpansionConfig {
            depth,
            min_token_length: 2,
            min_score: 1,
            max_words: 100,
        }
    }

    fn words(v: &[(String, usize)]) -> Vec<&str> {
        v.iter().map(|(w, _)| w.as_str()).collect()
    }

    #[test]
    fn depth_one_rules() {
        let out = happy().expand("happy", &cfg(1)).unwrap();
        assert_eq!(words(&out), ["glad", "joyful"]);
        assert!(!words(&out).contains(&"sad"));
    }

    #[test]
    fn depth_two_propagates() {
        let out = happy().expand("happy", &cfg(2)).unwrap();
        assert!(words(&out).contains(&"cheerful"));
    }

    #[test]
    fn short_words_filtered() {
        let mut t = happy();
        t.add("happy", Relation::Synonym, "g");
        let out = t.expand("happy", &cfg(1)).unwrap();
        assert!(!words(&out).contains(&"g"));
        let out = t.expand("happy", &ThesExpansionConfig { min_token_length: 1, ..cfg(1) }).unwrap();
        assert!(words(&out).contains(&"g"));
    }

    #[test]
    fn scores_count_distinct_derivations() {
        let t = Thesaurus::read_tsv(
            "a\tsyn\tbb\na\thyper\tbb\na\tsyn\tcc\ncc\tsyn\tbb\n".as_bytes(),
        )
        .unwrap();
        let out = t.expand("a", &cfg(2)).unwrap();
        assert_eq!(out[0], ("bb".to_owned(), 3));
        assert_eq!(out[1], ("cc".to_owned(), 1));
        let strict = t.expand("a", &ThesExpansionConfig { min_score: 2, ..cfg(2) }).unwrap();
        assert_eq!(words(&strict), ["bb"]);
    }

    #[test]
    fn unknown_topic() {
        assert!(happy().expand("angry", &cfg(1)).is_err());
    }

    #[test]
    fn bad_relation_reports_line() {
        match Thesaurus::read_tsv("a\tsyn\tb\na\tfoo\tc\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn arb_thesaurus() -> impl Strategy<Value = Thesaurus> {
        let word = prop::sample::select(vec!["aa", "bb", "cc", "dd", "ee", "ff", "gg", "h"]);
        let rel = prop::sample::select(vec![Relation::Synonym, Relation::Antonym, Relation::Hypernym]);
        prop::collection::vec((word.clone(), rel, word), 1..30).prop_map(|edges| {
            let mut t = Thesaurus::new();
            t.add("aa", Relation::Synonym, "bb");
            for (h, r, w) in edges {
                t.add(h, r, w);
            }
            t
        })
    }

    proptest! {
        #[test]
        fn expansion_invariants(t in arb_thesaurus(), depth in 1usize..4) {
            let c = ThesExpansionConfig { min_token_length: 0, ..cfg(depth) };
            let out = t.expand("aa", &c).unwrap();
            prop_assert!(out.iter().all(|(w, s)| w != "aa" && *s >= 1));
            prop_assert!(out.windows(2).all(|p| (p[0].1, &p[1].0) >= (p[1].1, &p[0].0)));
            let deeper = t.expand("aa", &ThesExpansionConfig { depth: depth + 1, ..c }).unwrap();
            let deeper: HashSet<_> = words(&deeper).into_iter().collect();
            prop_assert!(words(&out).iter().all(|w| deeper.contains(w)));
        }
    }
}
