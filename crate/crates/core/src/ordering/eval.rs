//! Bigram accuracy and holdout evaluation of sentence orderings.

use std::collections::HashSet;

use serde::Serialize;

use super::{build_matrix, Decoder};
use crate::coherence::CoherenceModel;
use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};

/// Fraction of the directed adjacent pairs of `gold` that also occur in `pred`.
///
/// Both orders must be arrangements of the same distinct labels, at least two.
pub fn bigram_accuracy(pred: &[usize], gold: &[usize]) -> Result<f64> {
    Ok(bigram_matches(pred, gold)? as f64 / (gold.len() - 1) as f64)
}

fn bigram_matches(pred: &[usize], gold: &[usize]) -> Result<usize> {
    let n = gold.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("bigram accuracy needs at least 2 items, got {n}")));
    }
    let (mut a, mut b) = (pred.to_vec(), gold.to_vec());
    a.sort_unstable();
    b.sort_unstable();
    let distinct = b.windows(2).all(|w| w[0] != w[1]);
    if a != b || !distinct {
        return Err(Error::InvalidArgument(
            "predicted and gold orders must contain the same distinct items".into(),
        ));
    }
    let gold_pairs: HashSet<(usize, usize)> = gold.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(pred.windows(2).filter(|w| gold_pairs.contains(&(w[0], w[1]))).count())
}

/// How per-document results are combined into `mean_accuracy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    /// Unweighted mean of per-document accuracies.
    #[default]
    PerDocument,
    /// Matched bigrams over all bigrams.
    PerBigram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub pooling: Pooling,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentAccuracy {
    pub id: String,
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub decoder: String,
    pub model: String,
    pub mean_accuracy: f64,
    pub documents: Vec<DocumentAccuracy>,
    pub skipped: usize,
}

/// Reorders every holdout document from its true first sentence and scores
/// the result against the original order.
///
/// Documents with fewer than two sentences are skipped and counted.
/// Documents are reported sorted by id.
pub fn evaluate_holdout(
    holdout: &Corpus,
    model: &CoherenceModel<'_>,
    decoder: Decoder,
    options: EvalOptions,
) -> Result<EvaluationReport> {
    let mut documents = Vec::new();
    let mut skipped = 0;
    let (mut matched, mut total) = (0usize, 0usize);
    let mut docs: Vec<_> = holdout.documents().iter().collect();
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    for doc in docs {
        let n = doc.len();
        if n < 2 {
            skipped += 1;
            continue;
        }
        let sentences: Vec<&Sentence> = doc.sentences.iter().collect();
        let matrix = build_matrix(&sentences, model)?;
        let pred = decoder.decode(&matrix, 0).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::InvalidArgument(format!("document {}: {msg}", doc.id)),
            other => other,
        })?;
        let gold: Vec<usize> = (0..n).collect();
        let m = bigram_matches(pred.as_slice(), &gold)?;
        matched += m;
        total += n - 1;
        documents.push(DocumentAccuracy {
            id: doc.id.clone(),
            n,
            accuracy: m as f64 / (n - 1) as f64,
        });
    }
    if documents.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no holdout document has two or more sentences ({skipped} skipped)"
        )));
    }
    let mean_accuracy = match options.pooling {
        Pooling::PerDocument => documents.iter().map(|d| d.accuracy).sum::<f64>() / documents.len() as f64,
        Pooling::PerBigram => matched as f64 / total as f64,
    };
    Ok(EvaluationReport {
        decoder: decoder.name().to_owned(),
        model: model.variant().name().to_owned(),
        mean_accuracy,
        documents,
        skipped,
    })
}
