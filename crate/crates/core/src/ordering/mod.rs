//! Sentence ordering: coherence matrices, decoders and evaluation.

mod decode;
mod eval;

use serde::Serialize;

use crate::coherence::CoherenceModel;
use crate::corpus::Sentence;
use crate::error::{Error, Result};

pub use decode::{order_beam, order_exact_dp, order_greedy, Decoder, DEFAULT_MAX_N, MAX_EXACT_N};
pub use eval::{bigram_accuracy, evaluate_holdout, DocumentAccuracy, EvalOptions, EvaluationReport, Pooling};

/// `scores[i][j]` = coherence of sentence `j` directly following sentence `i`.
/// The diagonal is never read.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    n: usize,
    scores: Vec<f64>,
}

impl CoherenceMatrix {
    /// From a full `n × n` table; diagonal values are ignored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut scores = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                if i != j && !x.is_finite() {
                    return Err(Error::InvalidArgument(format!("score ({i}, {j}) is not finite")));
                }
                scores.push(if i == j { f64::NAN } else { x });
            }
        }
        Ok(CoherenceMatrix { n, scores })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i != j, "diagonal of a coherence matrix is undefined");
        self.scores[i * self.n + j]
    }

    /// Sum of adjacent-pair scores, accumulated left to right.
    pub fn chain_score(&self, order: &[usize]) -> f64 {
        order.windows(2).fold(0.0, |acc, w| acc + self.get(w[0], w[1]))
    }
}

/// A permutation of sentence indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Ordering(pub Vec<usize>);

impl Ordering {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn identity(n: usize) -> Self {
        Ordering((0..n).collect())
    }
}

/// Pairwise coherence of every ordered pair of distinct sentences.
pub fn build_matrix(sentences: &[&Sentence], model: &CoherenceModel<'_>) -> Result<CoherenceMatrix> {
    let n = sentences.len();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot order an empty sentence set".into()));
    }
    let mut scores = vec![f64::NAN; n * n];
    match model {
        CoherenceModel::BowBoolean | CoherenceModel::BowFrequency => {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        scores[i * n + j] = model.score_pair(sentences[i], sentences[j])?;
                    }
                }
            }
        }
        CoherenceModel::EmbedAverage(_) | CoherenceModel::RecursiveNn { .. } => {
            let vectors = sentences
                .iter()
                .map(|s| model.compose_sentence(s))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    scores[i * n + j] = match model {
                        CoherenceModel::RecursiveNn { params, .. } => params.score_composed(&vectors[i], &vectors[j]),
                        _ => crate::embedding::cosine(&vectors[i], &vectors[j]).map_err(|e| Error::Unscoreable {
                            doc_id: sentences[i].doc_id.clone(),
                            index: sentences[i].index,
                            reason: e.to_string(),
                        })?,
                    };
                }
            }
        }
    }
    Ok(CoherenceMatrix { n, scores })
}
