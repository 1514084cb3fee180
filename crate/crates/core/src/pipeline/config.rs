//! INI-style pipeline configuration.
//!
//! ```text
//! seed = 7
//!
//! [paths]
//! corpus = corpus.jsonl
//! embeddings = vectors.txt
//!
//! [expansion]
//! backend = we
//! k = 20
//! ```
//!
//! A key inside `[section]` is read as `section.key`; keys may also be written
//! fully qualified outside any section. Relative paths resolve against the
//! directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::coherence::CoherenceVariant;
use crate::error::{Error, Result};
use crate::ordering::{Decoder, DEFAULT_MAX_N};
use crate::selection::{SelectionConfig, SelectionMethod};
use crate::thesaurus::ThesExpansionConfig;
use crate::topic_understanding::{ClusterConfig, ExpansionBackend, Preference, Representation};

/// Resource files; `None` when not configured.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResourcePaths {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub thesaurus: Option<PathBuf>,
    pub lda: Option<PathBuf>,
    pub recnn: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub expansion_backend: ExpansionBackend,
    /// Number of expanded words kept.
    pub expansion_k: usize,
    pub thesaurus: ThesExpansionConfig,
    /// Vector space the expanded words are clustered in.
    pub representation: Representation,
    pub cluster: ClusterConfig,
    pub selection: SelectionConfig,
    /// Selected sentences must score strictly above this to enter a paragraph.
    pub min_selection_score: f64,
    pub feedback_method: SelectionMethod,
    pub feedback_rounds: usize,
    pub feedback_words: usize,
    pub coherence: CoherenceVariant,
    pub decoder: Decoder,
    pub paths: ResourcePaths,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            expansion_backend: ExpansionBackend::We,
            expansion_k: 20,
            thesaurus: ThesExpansionConfig::default(),
            representation: Representation::We,
            cluster: ClusterConfig::default(),
            selection: SelectionConfig::default(),
            min_selection_score: 0.0,
            feedback_method: SelectionMethod::Counting,
            feedback_rounds: 1,
            feedback_words: 5,
            coherence: CoherenceVariant::BowFrequency,
            decoder: Decoder::ExactDp { max_n: DEFAULT_MAX_N },
            paths: ResourcePaths::default(),
            seed: 1,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value {value:?} for {key}: {e}")))
}

/// Splits an INI document into `section.key -> value`, keeping the line of each entry.
fn parse_entries(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut section = String::new();
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line_no, "unterminated section header"))?;
            section = name.trim().to_owned();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, "expected key = value"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::parse(line_no, "empty key"));
        }
        let key = if section.is_empty() { k.to_owned() } else { format!("{section}.{k}") };
        if out.insert(key.clone(), (line_no, v.to_owned())).is_some() {
            return Err(Error::parse(line_no, format!("duplicate key {key}")));
        }
    }
    Ok(out)
}

impl PipelineConfig {
    /// Parses config text; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c = PipelineConfig::default();
        let mut decoder = "dp".to_owned();
        let mut max_n = DEFAULT_MAX_N;
        let mut beam_width = 8usize;
        let mut cluster_seed = None;
        let path = |v: &str| Some(base_dir.join(v));
        for (key, (line, v)) in parse_entries(text)? {
            let v = v.as_str();
            let k = key.as_str();
            match k {
                "seed" => c.seed = parse_value(k, v)?,
                "expansion.backend" => c.expansion_backend = v.parse()?,
                "expansion.k" => c.expansion_k = parse_value(k, v)?,
                "thesaurus.depth" => c.thesaurus.depth = parse_value(k, v)?,
                "thesaurus.min_token_length" => c.thesaurus.min_token_length = parse_value(k, v)?,
                "thesaurus.min_score" => c.thesaurus.min_score = parse_value(k, v)?,
                "thesaurus.max_words" => c.thesaurus.max_words = parse_value(k, v)?,
                "cluster.representation" => c.representation = v.parse()?,
                "cluster.algorithm" => c.cluster.algorithm = v.parse()?,
                "cluster.k" => c.cluster.k = parse_value(k, v)?,
                "cluster.max_iterations" => c.cluster.max_iterations = parse_value(k, v)?,
                "cluster.damping" => c.cluster.damping = parse_value(k, v)?,
                "cluster.preference" => {
                    c.cluster.preference = if v == "median" {
                        Preference::Median
                    } else {
                        Preference::Value(parse_value(k, v)?)
                    }
                }
                "cluster.min_cluster_size" => c.cluster.min_cluster_size = parse_value(k, v)?,
                "cluster.seed" => cluster_seed = Some(parse_value(k, v)?),
                "selection.method" => c.selection.method = v.parse()?,
                "selection.top_k" => c.selection.top_k = parse_value(k, v)?,
                "selection.max_per_document" => c.selection.max_per_document = parse_value(k, v)?,
                "selection.min_sentence_tokens" => c.selection.min_sentence_tokens = parse_value(k, v)?,
                "selection.min_score" => c.min_selection_score = parse_value(k, v)?,
                "feedback.method" => c.feedback_method = v.parse()?,
                "feedback.rounds" => c.feedback_rounds = parse_value(k, v)?,
                "feedback.words" => c.feedback_words = parse_value(k, v)?,
                "coherence.variant" => c.coherence = v.parse()?,
                "ordering.decoder" => decoder = v.to_owned(),
                "ordering.max_n" => max_n = parse_value(k, v)?,
                "ordering.beam_width" => beam_width = parse_value(k, v)?,
                "paths.corpus" => c.paths.corpus = path(v),
                "paths.embeddings" => c.paths.embeddings = path(v),
                "paths.thesaurus" => c.paths.thesaurus = path(v),
                "paths.lda" => c.paths.lda = path(v),
                "paths.recnn" => c.paths.recnn = path(v),
                "paths.stopwords" => c.paths.stopwords = path(v),
                _ => return Err(Error::parse(line, format!("unknown key {k}"))),
            }
        }
        c.decoder = match decoder.as_str() {
            "greedy" => Decoder::Greedy,
            "dp" => Decoder::ExactDp { max_n },
            "beam" => Decoder::Beam { width: beam_width },
            other => return Err(Error::Config(format!("unknown decoder {other:?} (greedy, dp, beam)"))),
        };
        c.cluster.seed = cluster_seed.unwrap_or(c.seed);
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Checks value ranges and that every resource the chosen backends need is configured.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("expansion.k", self.expansion_k),
            ("cluster.k", self.cluster.k),
            ("cluster.min_cluster_size", self.cluster.min_cluster_size),
            ("selection.top_k", self.selection.top_k),
            ("selection.max_per_document", self.selection.max_per_document),
            ("selection.min_sentence_tokens", self.selection.min_sentence_tokens),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.cluster.damping > 0.0 && self.cluster.damping < 1.0) {
            return Err(Error::Config(format!("cluster.damping must lie in (0, 1), got {}", self.cluster.damping)));
        }
        if !self.min_selection_score.is_finite() {
            return Err(Error::Config("selection.min_score must be finite".into()));
        }
        if let Decoder::Beam { width: 0 } = self.decoder {
            return Err(Error::Config("ordering.beam_width must be at least 1".into()));
        }
        let p = &self.paths;
        let require = |present: bool, what: &str, why: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("paths.{what} is required by {why}")))
            }
        };
        require(p.corpus.is_some(), "corpus", "sentence selection")?;
        match self.expansion_backend {
            ExpansionBackend::Thes => require(p.thesaurus.is_some(), "thesaurus", "expansion.backend = thes")?,
            ExpansionBackend::Tm => require(p.lda.is_some(), "lda", "expansion.backend = tm")?,
            ExpansionBackend::We => require(p.embeddings.is_some(), "embeddings", "expansion.backend = we")?,
        }
        match self.representation {
            Representation::Tm => require(p.lda.is_some(), "lda", "cluster.representation = tm")?,
            Representation::We => require(p.embeddings.is_some(), "embeddings", "cluster.representation = we")?,
        }
        if self.selection.method == SelectionMethod::Embedding {
            require(p.embeddings.is_some(), "embeddings", "selection.method = embedding")?;
        }
        if self.feedback_method == SelectionMethod::Embedding && self.feedback_rounds > 0 {
            require(p.embeddings.is_some(), "embeddings", "feedback.method = embedding")?;
        }
        match self.coherence {
            CoherenceVariant::BowBoolean | CoherenceVariant::BowFrequency => {}
            CoherenceVariant::EmbedAverage => require(p.embeddings.is_some(), "embeddings", "coherence.variant = embed_average")?,
            CoherenceVariant::RecursiveNn => {
                require(p.embeddings.is_some(), "embeddings", "coherence.variant = recursive_nn")?;
                require(p.recnn.is_some(), "recnn", "coherence.variant = recursive_nn")?;
            }
        }
        Ok(())
    }
}
