//! Recursive neural network relatedness scorer.
//!
//! A sentence is folded left to right over a left-branching binary tree,
//! `v <- tanh(W_comp [v; w_next] + b_comp)`, starting from the first token's
//! vector. Two sentence vectors are concatenated, passed through a tanh
//! hidden layer and a 2-way softmax; class 1 means "s2 follows s1".
//! Training minimizes cross entropy over true and corrupted pairs with plain
//! SGD. Word vectors stay frozen.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pairs::{sample_pairs, PairLabel};
use crate::corpus::{Corpus, Sentence};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct RecnnParams {
    /// `d × 2d`
    pub comp_w: Matrix,
    pub comp_b: Vec<f64>,
    /// `h × 2d`
    pub hidden_w: Matrix,
    pub hidden_b: Vec<f64>,
    /// `2 × h`
    pub out_w: Matrix,
    pub out_b: Vec<f64>,
}

/// Gradients share the parameter layout.
pub type RecnnGrads = RecnnParams;

/// Intermediate values of one scored pair.
#[derive(Debug, Clone)]
pub(crate) struct Forward {
    pub states1: Vec<Vec<f64>>,
    pub states2: Vec<Vec<f64>>,
    pub input: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logits: [f64; 2],
    pub probs: [f64; 2],
}

fn softmax2(z: [f64; 2]) -> [f64; 2] {
    let m = z[0].max(z[1]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

/// `-ln softmax(z)[label]`
fn cross_entropy(z: [f64; 2], label: usize) -> f64 {
    let m = z[0].max(z[1]);
    m + ((z[0] - m).exp() + (z[1] - m).exp()).ln() - z[label]
}

/// In-vocabulary token vectors of `s`; out-of-vocabulary tokens are skipped.
pub(crate) fn leaves<'t>(s: &Sentence, table: &'t EmbeddingTable) -> Result<Vec<&'t [f64]>> {
    let v: Vec<&[f64]> = s.tokens.iter().filter_map(|t| table.get(t)).collect();
    if v.is_empty() {
        return Err(Error::Unscoreable {
            doc_id: s.doc_id.clone(),
            index: s.index,
            reason: "no token has a word vector".into(),
        });
    }
    Ok(v)
}

impl RecnnParams {
    pub fn zeros(dim: usize, hidden: usize) -> Self {
        RecnnParams {
            comp_w: Matrix::zeros(dim, 2 * dim),
            comp_b: vec![0.0; dim],
            hidden_w: Matrix::zeros(hidden, 2 * dim),
            hidden_b: vec![0.0; hidden],
            out_w: Matrix::zeros(2, hidden),
            out_b: vec![0.0; 2],
        }
    }

    /// Every entry uniform in `[-scale, scale]`.
    pub fn uniform<R: Rng>(dim: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut p = RecnnParams::zeros(dim, hidden);
        for block in p.blocks_mut() {
            for x in block.1 {
                *x = rng.gen_range(-scale..=scale);
            }
        }
        p
    }

    /// Weight matrices uniform within `gain · sqrt(6 / (fan_in + fan_out))`;
    /// biases start at zero.
    pub fn glorot<R: Rng>(dim: usize, hidden: usize, gain: f64, rng: &mut R) -> Self {
        let mut p = RecnnParams::zeros(dim, hidden);
        for m in [&mut p.comp_w, &mut p.hidden_w, &mut p.out_w] {
            let limit = gain * (6.0 / (m.rows + m.cols) as f64).sqrt();
            for x in &mut m.data {
                *x = rng.gen_range(-limit..=limit);
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.comp_b.len()
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_b.len()
    }

    /// Named parameter blocks in storage order.
    pub fn blocks(&self) -> [(&'static str, &[f64]); 6] {
        [
            ("comp_w", &self.comp_w.data),
            ("comp_b", &self.comp_b),
            ("hidden_w", &self.hidden_w.data),
            ("hidden_b", &self.hidden_b),
            ("out_w", &self.out_w.data),
            ("out_b", &self.out_b),
        ]
    }

    pub fn blocks_mut(&mut self) -> [(&'static str, &mut [f64]); 6] {
        [
            ("comp_w", &mut self.comp_w.data),
            ("comp_b", &mut self.comp_b),
            ("hidden_w", &mut self.hidden_w.data),
            ("hidden_b", &mut self.hidden_b),
            ("out_w", &mut self.out_w.data),
            ("out_b", &mut self.out_b),
        ]
    }

    /// Composition states `v_0 .. v_{m-1}`; the last one is the sentence vector.
    pub fn compose(&self, leaves: &[&[f64]]) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut states = Vec::with_capacity(leaves.len());
        states.push(leaves[0].to_vec());
        let mut x = vec![0.0; 2 * d];
        for leaf in &leaves[1..] {
            x[..d].copy_from_slice(states.last().unwrap());
            x[d..].copy_from_slice(leaf);
            let v = self.comp_w.affine(&x, &self.comp_b).into_iter().map(f64::tanh).collect();
            states.push(v);
        }
        states
    }

    pub(crate) fn forward(&self, a: &[&[f64]], b: &[&[f64]]) -> Forward {
        let states1 = self.compose(a);
        let states2 = self.compose(b);
        let (input, hidden, logits) = self.head(states1.last().unwrap(), states2.last().unwrap());
        Forward {
            states1,
            states2,
            input,
            hidden,
            logits,
            probs: softmax2(logits),
        }
    }

    fn head(&self, v1: &[f64], v2: &[f64]) -> (Vec<f64>, Vec<f64>, [f64; 2]) {
        let mut input = Vec::with_capacity(v1.len() + v2.len());
        input.extend_from_slice(v1);
        input.extend_from_slice(v2);
        let hidden: Vec<f64> = self.hidden_w.affine(&input, &self.hidden_b).into_iter().map(f64::tanh).collect();
        let z = self.out_w.affine(&hidden, &self.out_b);
        (input, hidden, [z[0], z[1]])
    }

    /// Positive-class probability from two already composed sentence vectors.
    pub fn score_composed(&self, v1: &[f64], v2: &[f64]) -> f64 {
        softmax2(self.head(v1, v2).2)[1]
    }

    /// Positive-class probability for the pair.
    pub fn score(&self, a: &[&[f64]], b: &[&[f64]]) -> f64 {
        self.forward(a, b).probs[1]
    }

    /// Cross-entropy loss of one labelled pair (`label` 1 = true pair).
    pub fn loss(&self, a: &[&[f64]], b: &[&[f64]], label: usize) -> f64 {
        cross_entropy(self.forward(a, b).logits, label)
    }

    /// Loss and its gradient with respect to every parameter block.
    pub fn loss_and_grad(&self, a: &[&[f64]], b: &[&[f64]], label: usize) -> (f64, RecnnGrads) {
        let mut grads = RecnnParams::zeros(self.dim(), self.hidden_size());
        let loss = self.accumulate_grad(a, b, label, &mut grads);
        (loss, grads)
    }

    fn accumulate_grad(&self, a: &[&[f64]], b: &[&[f64]], label: usize, grads: &mut RecnnGrads) -> f64 {
        let d = self.dim();
        let f = self.forward(a, b);
        let mut dz = f.probs;
        dz[label] -= 1.0;
        grads.out_w.add_outer(&dz, &f.hidden);
        for (g, x) in grads.out_b.iter_mut().zip(dz) {
            *g += x;
        }
        let dh = self.out_w.transpose_mul(&dz);
        let dpre: Vec<f64> = dh.iter().zip(&f.hidden).map(|(g, h)| g * (1.0 - h * h)).collect();
        grads.hidden_w.add_outer(&dpre, &f.input);
        for (g, x) in grads.hidden_b.iter_mut().zip(&dpre) {
            *g += x;
        }
        let dinput = self.hidden_w.transpose_mul(&dpre);
        self.backprop_tree(&f.states1, a, dinput[..d].to_vec(), grads);
        self.backprop_tree(&f.states2, b, dinput[d..].to_vec(), grads);
        cross_entropy(f.logits, label)
    }

    fn backprop_tree(&self, states: &[Vec<f64>], leaves: &[&[f64]], mut dv: Vec<f64>, grads: &mut RecnnGrads) {
        let d = self.dim();
        let mut x = vec![0.0; 2 * d];
        for i in (1..states.len()).rev() {
            let dpre: Vec<f64> = dv.iter().zip(&states[i]).map(|(g, v)| g * (1.0 - v * v)).collect();
            x[..d].copy_from_slice(&states[i - 1]);
            x[d..].copy_from_slice(leaves[i]);
            grads.comp_w.add_outer(&dpre, &x);
            for (g, p) in grads.comp_b.iter_mut().zip(&dpre) {
                *g += p;
            }
            let dx = self.comp_w.transpose_mul(&dpre);
            dv = dx[..d].to_vec();
        }
    }

    /// `self -= lr * grads`
    pub fn step(&mut self, grads: &RecnnGrads, lr: f64) {
        for ((_, p), (_, g)) in self.blocks_mut().into_iter().zip(grads.blocks()) {
            for (x, dx) in p.iter_mut().zip(g) {
                *x -= lr * dx;
            }
        }
    }

    /// Text format: `"d h"`, then `W_comp`, `b_comp`, `W_s`, `b_s`, `W_o`, `b_o`,
    /// one matrix row or bias vector per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<writer>", e);
        let line = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        writeln!(w, "{} {}", self.dim(), self.hidden_size()).map_err(io)?;
        for (m, b) in [(&self.comp_w, &self.comp_b), (&self.hidden_w, &self.hidden_b), (&self.out_w, &self.out_b)] {
            for r in 0..m.rows {
                writeln!(w, "{}", line(m.row(r))).map_err(io)?;
            }
            writeln!(w, "{}", line(b)).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut values = Vec::new();
        let mut header: Option<(usize, usize)> = None;
        for (n, line) in reader.lines().enumerate() {
            let lineno = n + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            if header.is_none() {
                let f: Vec<&str> = line.split_whitespace().collect();
                let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad header field {s:?}")));
                if f.len() != 2 {
                    return Err(Error::parse(lineno, "header must be \"d h\""));
                }
                header = Some((parse(f[0])?, parse(f[1])?));
                continue;
            }
            for s in line.split_whitespace() {
                values.push(s.parse::<f64>().map_err(|_| Error::parse(lineno, format!("bad value {s:?}")))?);
            }
        }
        let (d, h) = header.ok_or_else(|| Error::parse(1, "missing header"))?;
        let mut p = RecnnParams::zeros(d, h);
        let expected: usize = p.blocks().iter().map(|b| b.1.len()).sum();
        if values.len() != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("d={d}, h={h} needs {expected} values, file has {}", values.len()),
            });
        }
        let mut it = values.into_iter();
        for (_, block) in p.blocks_mut() {
            for x in block {
                *x = it.next().unwrap();
            }
        }
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        RecnnParams::read_text(BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_text(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecnnConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub hidden_size: usize,
    pub negatives_per_positive: usize,
    /// Multiplier on the Glorot-uniform bound of the initial weights.
    pub init_gain: f64,
    pub seed: u64,
}

impl Default for RecnnConfig {
    fn default() -> Self {
        RecnnConfig {
            learning_rate: 0.05,
            epochs: 20,
            hidden_size: 16,
            negatives_per_positive: 1,
            init_gain: 1.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingReport {
    /// Mean loss of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Samples skipped because a sentence had no word vectors.
    pub skipped: usize,
}

/// Trains the scorer on adjacent-sentence pairs of `corpus` against
/// corrupted pairs. Fresh negatives are drawn every epoch and the samples are
/// visited in a shuffled order.
pub fn train_recnn(corpus: &Corpus, table: &EmbeddingTable, config: &RecnnConfig) -> Result<(RecnnParams, TrainingReport)> {
    if config.hidden_size == 0 || config.negatives_per_positive == 0 {
        return Err(Error::InvalidArgument("hidden_size and negatives_per_positive must be positive".into()));
    }
    if !(config.init_gain >= 0.0 && config.init_gain.is_finite()) {
        return Err(Error::InvalidArgument("init_gain must be finite and non-negative".into()));
    }
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::InvalidArgument("learning_rate must be finite and non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = RecnnParams::glorot(table.dim(), config.hidden_size, config.init_gain, &mut rng);
    let mut grads = RecnnParams::zeros(table.dim(), config.hidden_size);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut skipped = 0;

    for epoch in 0..config.epochs {
        let mut samples = sample_pairs(corpus, config.negatives_per_positive, rng.gen())?;
        samples.shuffle(&mut rng);
        let (mut total, mut count) = (0.0, 0usize);
        for (i, sample) in samples.iter().enumerate() {
            let (Ok(a), Ok(b)) = (leaves(sample.s1, table), leaves(sample.second(), table)) else {
                if epoch == 0 {
                    skipped += 1;
                }
                continue;
            };
            let label = match sample.label {
                PairLabel::TruePair => 1,
                PairLabel::Corrupted => 0,
            };
            for (_, g) in grads.blocks_mut() {
                g.fill(0.0);
            }
            let loss = params.accumulate_grad(&a, &b, label, &mut grads);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, sample: i, loss });
            }
            params.step(&grads, config.learning_rate);
            total += loss;
            count += 1;
        }
        let mean = if count > 0 { total / count as f64 } else { 0.0 };
        log::debug!("recnn epoch {epoch}: loss {mean:.6}");
        epoch_losses.push(mean);
    }
    if skipped > 0 {
        log::warn!("{skipped} training pair(s) skipped: sentence without word vectors");
    }
    Ok((params, TrainingReport { epoch_losses, skipped }))
}
