//! Skipgram with negative sampling.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EmbeddingTable;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linalg::dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipgramConfig {
    pub dim: usize,
    /// Context radius on each side of the center word.
    pub window: usize,
    /// Noise words drawn per (center, context) pair.
    pub negatives: usize,
    pub epochs: usize,
    /// Initial step size, decayed linearly over training.
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 50,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 5,
            seed: 1,
        }
    }
}

impl SkipgramConfig {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("min_count", self.min_count),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("skipgram {name} must be positive")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(
                "skipgram learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Loss and gradients of one negative-sampling objective term.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGrad {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln σ(x)` without overflow.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// `-ln σ(u_ctx·v) - Σ_k ln σ(-u_k·v)` and its gradients with respect to the
/// center input vector `v`, the context output vector and each noise output vector.
pub fn sgns_loss_and_grad(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGrad {
    let pos = dot(center, context);
    let mut loss = neg_log_sigmoid(pos);
    let g_pos = sigmoid(pos) - 1.0;
    let mut grad_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let grad_context = center.iter().map(|v| g_pos * v).collect();
    let mut grad_negs = Vec::with_capacity(negatives.len());
    for u in negatives {
        let s = dot(center, u);
        loss += neg_log_sigmoid(-s);
        let g = sigmoid(s);
        for (gc, uk) in grad_center.iter_mut().zip(u.iter()) {
            *gc += g * uk;
        }
        grad_negs.push(center.iter().map(|v| g * v).collect());
    }
    SgnsGrad {
        loss,
        center: grad_center,
        context: grad_context,
        negatives: grad_negs,
    }
}

/// Cumulative unigram^0.75 distribution for noise sampling.
struct NoiseSampler {
    cumulative: Vec<f64>,
}

impl NoiseSampler {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseSampler { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

/// Trains word vectors over the sentences of `corpus`.
///
/// Context windows never cross sentence boundaries. Words rarer than
/// `min_count` are removed before windowing. The returned table holds the
/// input (center) vectors, ordered by frequency descending then word.
pub fn train_skipgram(corpus: &Corpus, config: &SkipgramConfig) -> Result<EmbeddingTable> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("cannot train embeddings on an empty corpus".into()));
    }
    let mut vocab: Vec<(&str, usize)> = corpus
        .vocabulary()
        .iter()
        .filter(|(_, &c)| c >= config.min_count)
        .map(|(w, &c)| (w.as_str(), c))
        .collect();
    if vocab.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no word occurs at least min_count={} times",
            config.min_count
        )));
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let ids: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
    let counts: Vec<usize> = vocab.iter().map(|(_, c)| *c).collect();
    let noise = NoiseSampler::new(&counts);

    let sentences: Vec<Vec<usize>> = corpus
        .sentences()
        .map(|s| s.tokens.iter().filter_map(|t| ids.get(t.as_str()).copied()).collect())
        .collect();

    let (v, d) = (vocab.len(), config.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<f64> = (0..v * d)
        .map(|_| (rng.gen::<f64>() - 0.5) / d as f64)
        .collect();
    let mut output = vec![0.0; v * d];

    let words_per_epoch: usize = sentences.iter().map(Vec::len).sum();
    let total = (words_per_epoch * config.epochs).max(1) as f64;
    let mut processed = 0usize;
    let mut neg_ids = Vec::with_capacity(config.negatives);

    for _ in 0..config.epochs {
        for sent in &sentences {
            for (pos, &center) in sent.iter().enumerate() {
                let lr = config.learning_rate * (1.0 - processed as f64 / total).max(1e-4);
                processed += 1;
                let lo = pos.saturating_sub(config.window);
                let hi = (pos + config.window + 1).min(sent.len());
                for (cpos, &context) in sent.iter().enumerate().take(hi).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    neg_ids.clear();
                    for _ in 0..config.negatives {
                        let k = noise.sample(&mut rng);
                        if k != context {
                            neg_ids.push(k);
                        }
                    }
                    let grad = {
                        let negs: Vec<&[f64]> =
                            neg_ids.iter().map(|&k| &output[k * d..(k + 1) * d]).collect();
                        sgns_loss_and_grad(
                            &input[center * d..(center + 1) * d],
                            &output[context * d..(context + 1) * d],
                            &negs,
                        )
                    };
                    for (w, g) in output[context * d..(context + 1) * d].iter_mut().zip(&grad.context) {
                        *w -= lr * g;
                    }
                    for (&k, gk) in neg_ids.iter().zip(&grad.negatives) {
                        for (w, g) in output[k * d..(k + 1) * d].iter_mut().zip(gk) {
                            *w -= lr * g;
                        }
                    }
                    for (w, g) in input[center * d..(center + 1) * d].iter_mut().zip(&grad.center) {
                        *w -= lr * g;
                    }
                }
            }
        }
    }

    let mut table = EmbeddingTable::new(d)?;
    for (i, (w, _)) in vocab.iter().enumerate() {
        table.insert(*w, input[i * d..(i + 1) * d].to_vec())?;
    }
    Ok(table)
}
