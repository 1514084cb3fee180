//! Pairwise coherence functions `f(s1, s2)`: how well `s2` follows `s1`.

mod pairs;
mod recnn;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::embedding::{cosine, EmbeddingTable};
use crate::error::{Error, Result};
use crate::linalg::norm;

pub use pairs::{sample_pairs, PairLabel, PairSample};
pub use recnn::{train_recnn, RecnnConfig, RecnnGrads, RecnnParams, TrainingReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceVariant {
    BowBoolean,
    BowFrequency,
    EmbedAverage,
    RecursiveNn,
}

impl CoherenceVariant {
    pub const ALL: [CoherenceVariant; 4] = [
        CoherenceVariant::BowBoolean,
        CoherenceVariant::BowFrequency,
        CoherenceVariant::EmbedAverage,
        CoherenceVariant::RecursiveNn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoherenceVariant::BowBoolean => "bow_boolean",
            CoherenceVariant::BowFrequency => "bow_frequency",
            CoherenceVariant::EmbedAverage => "embed_average",
            CoherenceVariant::RecursiveNn => "recursive_nn",
        }
    }
}

impl std::fmt::Display for CoherenceVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CoherenceVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CoherenceVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown coherence variant {s:?} (bow_boolean, bow_frequency, embed_average, recursive_nn)"
                ))
            })
    }
}

/// A coherence scorer together with the resources it needs.
#[derive(Debug, Clone, Copy)]
pub enum CoherenceModel<'a> {
    BowBoolean,
    BowFrequency,
    EmbedAverage(&'a EmbeddingTable),
    RecursiveNn {
        params: &'a RecnnParams,
        table: &'a EmbeddingTable,
    },
}

fn unscoreable(s: &Sentence, reason: impl Into<String>) -> Error {
    Error::Unscoreable {
        doc_id: s.doc_id.clone(),
        index: s.index,
        reason: reason.into(),
    }
}

fn bag(s: &Sentence, boolean: bool) -> BTreeMap<&str, f64> {
    let mut bag = BTreeMap::new();
    for t in &s.tokens {
        let e = bag.entry(t.as_str()).or_insert(0.0);
        *e = if boolean { 1.0 } else { *e + 1.0 };
    }
    bag
}

fn bag_cosine(s1: &Sentence, s2: &Sentence, boolean: bool) -> Result<f64> {
    let (a, b) = (bag(s1, boolean), bag(s2, boolean));
    let na = norm(&a.values().copied().collect::<Vec<_>>());
    let nb = norm(&b.values().copied().collect::<Vec<_>>());
    if na == 0.0 {
        return Err(unscoreable(s1, "empty bag of words"));
    }
    if nb == 0.0 {
        return Err(unscoreable(s2, "empty bag of words"));
    }
    let shared: f64 = a.iter().filter_map(|(w, x)| b.get(w).map(|y| x * y)).sum();
    Ok((shared / (na * nb)).clamp(-1.0, 1.0))
}

impl<'a> CoherenceModel<'a> {
    pub fn variant(&self) -> CoherenceVariant {
        match self {
            CoherenceModel::BowBoolean => CoherenceVariant::BowBoolean,
            CoherenceModel::BowFrequency => CoherenceVariant::BowFrequency,
            CoherenceModel::EmbedAverage(_) => CoherenceVariant::EmbedAverage,
            CoherenceModel::RecursiveNn { .. } => CoherenceVariant::RecursiveNn,
        }
    }

    /// Builds the model for `variant`, checking the needed resources are present.
    pub fn from_variant(
        variant: CoherenceVariant,
        table: Option<&'a EmbeddingTable>,
        params: Option<&'a RecnnParams>,
    ) -> Result<Self> {
        let need_table = || Error::Config(format!("{variant} coherence needs word vectors"));
        Ok(match variant {
            CoherenceVariant::BowBoolean => CoherenceModel::BowBoolean,
            CoherenceVariant::BowFrequency => CoherenceModel::BowFrequency,
            CoherenceVariant::EmbedAverage => CoherenceModel::EmbedAverage(table.ok_or_else(need_table)?),
            CoherenceVariant::RecursiveNn => {
                let table = table.ok_or_else(need_table)?;
                let params = params.ok_or_else(|| Error::Config("recursive_nn coherence needs trained parameters".into()))?;
                if params.dim() != table.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: params.dim(),
                        got: table.dim(),
                    });
                }
                CoherenceModel::RecursiveNn { params, table }
            }
        })
    }

    /// Dense sentence vector: word average, or the recursive fold of its tokens.
    pub fn compose_sentence(&self, s: &Sentence) -> Result<Vec<f64>> {
        match self {
            CoherenceModel::BowBoolean | CoherenceModel::BowFrequency => Err(unscoreable(
                s,
                format!("{} has no dense sentence vector", self.variant()),
            )),
            CoherenceModel::EmbedAverage(table) => table.average(&s.tokens).map_err(|e| unscoreable(s, e.to_string())),
            CoherenceModel::RecursiveNn { params, table } => {
                let leaves = recnn::leaves(s, table)?;
                Ok(params.compose(&leaves).pop().expect("at least one leaf"))
            }
        }
    }

    /// Coherence of `s2` directly following `s1`.
    ///
    /// Cosine in `[-1, 1]` for the similarity variants; the positive-class
    /// probability in `(0, 1)` for the recursive network.
    pub fn score_pair(&self, s1: &Sentence, s2: &Sentence) -> Result<f64> {
        match self {
            CoherenceModel::BowBoolean => bag_cosine(s1, s2, true),
            CoherenceModel::BowFrequency => bag_cosine(s1, s2, false),
            CoherenceModel::EmbedAverage(_) => {
                let (a, b) = (self.compose_sentence(s1)?, self.compose_sentence(s2)?);
                if norm(&a) == 0.0 {
                    return Err(unscoreable(s1, "zero sentence vector"));
                }
                if norm(&b) == 0.0 {
                    return Err(unscoreable(s2, "zero sentence vector"));
                }
                cosine(&a, &b)
            }
            CoherenceModel::RecursiveNn { params, table } => {
                let a = recnn::leaves(s1, table)?;
                let b = recnn::leaves(s2, table)?;
                Ok(params.forward(&a, &b).probs[1])
            }
        }
    }
}

/// Free-function form of [`CoherenceModel::score_pair`].
pub fn score_pair(model: &CoherenceModel<'_>, s1: &Sentence, s2: &Sentence) -> Result<f64> {
    model.score_pair(s1, s2)
}

/// Free-function form of [`CoherenceModel::compose_sentence`].
pub fn compose_sentence(s: &Sentence, model: &CoherenceModel<'_>) -> Result<Vec<f64>> {
    model.compose_sentence(s)
}
