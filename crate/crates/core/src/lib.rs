//! Planning-based extractive essay generation.
//!
//! A topic word is expanded into related words, the words are clustered into
//! arguments, each argument retrieves supporting sentences from a tokenized
//! corpus (optionally bootstrapping new words from what it retrieved), and the
//! sentences of each argument are ordered by a pairwise coherence model.
//!
//! The crate also ships the pieces the pipeline is built on: skipgram word
//! embeddings, an LDA topic model, a rule-based thesaurus expander, K-Means and
//! Affinity Propagation, and exact / approximate sentence-order decoders with a
//! bigram accuracy metric.

pub mod coherence;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod ordering;
pub mod pipeline;
pub mod selection;
pub mod thesaurus;
pub mod topic_model;
pub mod topic_understanding;

pub mod linalg;

pub use coherence::{CoherenceModel, CoherenceVariant, PairLabel, PairSample, RecnnConfig, RecnnParams};
pub use corpus::{Corpus, DiscourseTag, Document, Sentence};
pub use embedding::{EmbeddingTable, SkipgramConfig};
pub use error::{Error, Result};
pub use ordering::{CoherenceMatrix, Decoder, EvaluationReport, Ordering};
pub use pipeline::{Essay, PipelineConfig, Resources, Trace};
pub use selection::{ScoredSentence, SelectionConfig, SelectionMethod};
pub use thesaurus::{ThesExpansionConfig, Thesaurus};
pub use topic_model::LdaModel;
pub use topic_understanding::{Argument, ClusterAlgorithm, ClusterConfig, ExpansionBackend, Preference};
