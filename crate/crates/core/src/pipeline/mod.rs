//! End-to-end essay generation: expand, cluster, select, order, assemble.

mod config;

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::coherence::{CoherenceModel, CoherenceVariant, RecnnParams};
use crate::corpus::{ingest_corpus, Corpus, DiscourseTag, Sentence};
use crate::embedding::{load_embeddings, EmbeddingTable};
use crate::error::{Error, Result};
use crate::ordering::build_matrix;
use crate::selection::{feedback_expand, load_stopwords, select_sentences_excluding, ScoredSentence};
use crate::thesaurus::Thesaurus;
use crate::topic_model::LdaModel;
use crate::topic_understanding::{cluster_arguments_detailed, expand_topic, Argument, WordResources};

pub use config::{PipelineConfig, ResourcePaths};

/// Everything the pipeline reads from disk.
#[derive(Debug, Clone)]
pub struct Resources {
    /// The corpus with discourse tags assigned.
    pub corpus: Corpus,
    pub embeddings: Option<EmbeddingTable>,
    pub thesaurus: Option<Thesaurus>,
    pub lda: Option<LdaModel>,
    pub recnn: Option<RecnnParams>,
    pub stopwords: HashSet<String>,
}

impl Resources {
    /// Loads every configured resource.
    pub fn load(config: &PipelineConfig) -> Result<Self> {
        let p = &config.paths;
        let corpus_path = p.corpus.as_ref().ok_or_else(|| Error::Config("paths.corpus is not set".into()))?;
        Ok(Resources {
            corpus: ingest_corpus(corpus_path)?.tagged(),
            embeddings: p.embeddings.as_ref().map(load_embeddings).transpose()?,
            thesaurus: p.thesaurus.as_ref().map(Thesaurus::load).transpose()?,
            lda: p.lda.as_ref().map(LdaModel::load).transpose()?,
            recnn: p.recnn.as_ref().map(RecnnParams::load).transpose()?,
            stopwords: p.stopwords.as_ref().map(load_stopwords).transpose()?.unwrap_or_default(),
        })
    }

    pub fn word_resources<'a>(&'a self, config: &'a PipelineConfig) -> WordResources<'a> {
        WordResources {
            thesaurus: self.thesaurus.as_ref(),
            thes_config: Some(&config.thesaurus),
            lda: self.lda.as_ref(),
            embeddings: self.embeddings.as_ref(),
        }
    }

    pub fn coherence_model(&self, variant: CoherenceVariant) -> Result<CoherenceModel<'_>> {
        CoherenceModel::from_variant(variant, self.embeddings.as_ref(), self.recnn.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Paragraph {
    pub argument: Argument,
    /// Sentences in decoded order.
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Essay {
    pub topic: String,
    pub paragraphs: Vec<Paragraph>,
}

impl Essay {
    /// Plain text: sentences joined by a space, paragraphs by a blank line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.paragraphs.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let raws: Vec<&str> = p.sentences.iter().map(|s| s.raw.as_str()).collect();
            out.push_str(&raws.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredWord {
    pub word: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceRef {
    pub doc_id: String,
    pub index: usize,
    pub score: f64,
}

/// One selection pass for an argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionRound {
    pub words: Vec<String>,
    pub selected: Vec<SentenceRef>,
    /// Words proposed from `selected` for the next round.
    pub feedback: Vec<ScoredWord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParagraphTrace {
    pub argument_id: usize,
    pub rounds: Vec<SelectionRound>,
    /// Position in the final selection of the start sentence.
    pub start: usize,
    /// Decoded order as positions in the final selection.
    pub order: Vec<usize>,
    pub chain_score: f64,
    pub dropped: bool,
}

/// Every intermediate artifact of one [`generate_essay`] run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub topic: String,
    pub expansion_backend: String,
    pub expansion: Vec<ScoredWord>,
    pub arguments: Vec<Argument>,
    pub out_of_vocabulary: Vec<String>,
    pub dropped_clusters: usize,
    pub coherence: String,
    pub decoder: String,
    pub paragraphs: Vec<ParagraphTrace>,
}

impl Trace {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn scored_words(words: Vec<(String, f64)>) -> Vec<ScoredWord> {
    words.into_iter().map(|(word, score)| ScoredWord { word, score }).collect()
}

fn refs(selected: &[ScoredSentence<'_>]) -> Vec<SentenceRef> {
    selected
        .iter()
        .map(|s| SentenceRef {
            doc_id: s.sentence.doc_id.clone(),
            index: s.sentence.index,
            score: s.score,
        })
        .collect()
}

/// Generates an essay for `topic`.
///
/// Only sentences scoring above `min_selection_score` are kept. Arguments are
/// processed in order and a sentence used by one paragraph (or any sentence
/// with the same tokens) is unavailable to later ones. Arguments that retrieve
/// nothing are dropped with a warning.
pub fn generate_essay(topic: &str, config: &PipelineConfig, resources: &Resources) -> Result<(Essay, Trace)> {
    let words = resources.word_resources(config);
    let expansion = expand_topic(topic, config.expansion_backend, &words, config.expansion_k)?;
    let expanded: Vec<String> = expansion.iter().map(|(w, _)| w.clone()).collect();
    let clusters = cluster_arguments_detailed(&expanded, config.representation, &config.cluster, &words)?;
    if clusters.arguments.is_empty() {
        return Err(Error::Validation(format!(
            "no argument has at least {} words ({} cluster(s) dropped)",
            config.cluster.min_cluster_size, clusters.dropped_clusters
        )));
    }
    let model = resources.coherence_model(config.coherence)?;
    let table = resources.embeddings.as_ref();
    let corpus = &resources.corpus;

    let mut same_tokens: HashMap<&[String], Vec<(String, usize)>> = HashMap::new();
    for s in corpus.sentences() {
        same_tokens.entry(s.tokens.as_slice()).or_default().push((s.doc_id.clone(), s.index));
    }

    let select = |w: &[String], used: &HashSet<(String, usize)>| -> Result<Vec<ScoredSentence<'_>>> {
        let mut s = select_sentences_excluding(w, corpus, &config.selection, table, used)?;
        s.retain(|x| x.score > config.min_selection_score);
        Ok(s)
    };
    let mut used: HashSet<(String, usize)> = HashSet::new();
    let mut paragraphs = Vec::new();
    let mut traces = Vec::new();
    for argument in &clusters.arguments {
        let mut w = argument.supporting_words.clone();
        let mut selected = select(&w, &used)?;
        let mut rounds = Vec::new();
        for _ in 0..config.feedback_rounds {
            if selected.is_empty() {
                break;
            }
            let sentences: Vec<&Sentence> = selected.iter().map(|s| s.sentence).collect();
            let new = feedback_expand(&w, &sentences, config.feedback_method, config.feedback_words, table, &resources.stopwords)?;
            let stop = new.is_empty();
            rounds.push(SelectionRound {
                words: w.clone(),
                selected: refs(&selected),
                feedback: scored_words(new.clone()),
            });
            if stop {
                break;
            }
            w.extend(new.into_iter().map(|(word, _)| word));
            selected = select(&w, &used)?;
        }
        rounds.push(SelectionRound {
            words: w.clone(),
            selected: refs(&selected),
            feedback: Vec::new(),
        });

        if selected.is_empty() {
            log::warn!("argument {} selected no sentences and was dropped", argument.id);
            traces.push(ParagraphTrace {
                argument_id: argument.id,
                rounds,
                start: 0,
                order: Vec::new(),
                chain_score: 0.0,
                dropped: true,
            });
            continue;
        }

        let sentences: Vec<&Sentence> = selected.iter().map(|s| s.sentence).collect();
        let start = sentences
            .iter()
            .position(|s| s.tag == Some(DiscourseTag::Introduction))
            .unwrap_or(0);
        let matrix = build_matrix(&sentences, &model)?;
        let order = config.decoder.decode(&matrix, start)?;
        for s in &sentences {
            for key in &same_tokens[s.tokens.as_slice()] {
                used.insert(key.clone());
            }
        }
        traces.push(ParagraphTrace {
            argument_id: argument.id,
            rounds,
            start,
            order: order.0.clone(),
            chain_score: matrix.chain_score(order.as_slice()),
            dropped: false,
        });
        paragraphs.push(Paragraph {
            argument: argument.clone(),
            sentences: order.as_slice().iter().map(|&i| sentences[i].clone()).collect(),
        });
    }
    if paragraphs.is_empty() {
        return Err(Error::Validation(format!(
            "none of the {} argument(s) selected any sentence",
            clusters.arguments.len()
        )));
    }
    let trace = Trace {
        topic: topic.to_owned(),
        expansion_backend: config.expansion_backend.name().to_owned(),
        expansion: scored_words(expansion),
        arguments: clusters.arguments,
        out_of_vocabulary: clusters.out_of_vocabulary,
        dropped_clusters: clusters.dropped_clusters,
        coherence: config.coherence.name().to_owned(),
        decoder: config.decoder.name().to_owned(),
        paragraphs: traces,
    };
    Ok((
        Essay {
            topic: topic.to_owned(),
            paragraphs,
        },
        trace,
    ))
}
