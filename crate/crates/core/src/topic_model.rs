//! Latent Dirichlet Allocation trained by collapsed Gibbs sampling.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Trained topic-word distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    num_topics: usize,
    alpha: f64,
    beta: f64,
    /// `K × V`, row-major.
    phi: Vec<f64>,
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaConfig {
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// `alpha = 50/K`, `beta = 0.01`, 500 sweeps.
    pub fn with_topics(num_topics: usize) -> Self {
        LdaConfig {
            num_topics,
            alpha: 50.0 / num_topics.max(1) as f64,
            beta: 0.01,
            iterations: 500,
            seed: 1,
        }
    }
}

/// Collapsed Gibbs sampler state.
pub struct GibbsSampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<usize>>,
    topic_word: Vec<usize>,
    topic_total: Vec<usize>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl GibbsSampler {
    /// Random initial assignment. `docs` hold word ids below `vocab_size`.
    pub fn new(docs: Vec<Vec<usize>>, vocab_size: usize, config: &LdaConfig) -> Result<Self> {
        if config.num_topics == 0 {
            return Err(Error::InvalidArgument("number of topics must be positive".into()));
        }
        if !(config.alpha > 0.0 && config.beta > 0.0) {
            return Err(Error::InvalidArgument("alpha and beta must be positive".into()));
        }
        let k = config.num_topics;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut topic_word = vec![0; k * vocab_size];
        let mut topic_total = vec![0; k];
        let mut doc_topic = Vec::with_capacity(docs.len());
        let mut assignments = Vec::with_capacity(docs.len());
        for doc in &docs {
            let mut counts = vec![0; k];
            let z: Vec<usize> = doc
                .iter()
                .map(|&w| {
                    let t = rng.gen_range(0..k);
                    counts[t] += 1;
                    topic_word[t * vocab_size + w] += 1;
                    topic_total[t] += 1;
                    t
                })
                .collect();
            doc_topic.push(counts);
            assignments.push(z);
        }
        Ok(GibbsSampler {
            k,
            v: vocab_size,
            alpha: config.alpha,
            beta: config.beta,
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            weights: vec![0.0; k],
        })
    }

    /// One full pass resampling every token's topic.
    pub fn sweep(&mut self) {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (self.doc_topic[d][t] as f64 + self.alpha)
                        * (self.topic_word[t * v + w] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + vbeta);
                    total += p;
                    self.weights[t] = total;
                }
                let x = self.rng.gen::<f64>() * total;
                let new = self.weights.partition_point(|&c| c <= x).min(k - 1);

                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_total[new] += 1;
            }
        }
    }

    pub fn topic_totals(&self) -> &[usize] {
        &self.topic_total
    }

    pub fn num_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// `phi[k][w] = (n_kw + beta) / (n_k + V·beta)` from the current sample.
    pub fn phi(&self) -> Vec<f64> {
        let vbeta = self.v as f64 * self.beta;
        let mut phi = Vec::with_capacity(self.k * self.v);
        for t in 0..self.k {
            let denom = self.topic_total[t] as f64 + vbeta;
            phi.extend((0..self.v).map(|w| (self.topic_word[t * self.v + w] as f64 + self.beta) / denom));
        }
        phi
    }
}

impl LdaModel {
    /// Trains on all documents of `corpus`; each document is one bag of tokens.
    pub fn train(corpus: &Corpus, config: &LdaConfig) -> Result<Self> {
        if corpus.vocabulary().is_empty() {
            return Err(Error::InvalidArgument("cannot train LDA on an empty vocabulary".into()));
        }
        let vocabulary: Vec<String> = corpus.vocabulary().keys().cloned().collect();
        let index: HashMap<String, usize> =
            vocabulary.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let docs = corpus
            .documents()
            .iter()
            .map(|d| {
                d.sentences
                    .iter()
                    .flat_map(|s| s.tokens.iter().map(|t| index[t]))
                    .collect()
            })
            .collect();
        let mut sampler = GibbsSampler::new(docs, vocabulary.len(), config)?;
        for _ in 0..config.iterations {
            sampler.sweep();
        }
        Ok(LdaModel {
            num_topics: config.num_topics,
            alpha: config.alpha,
            beta: config.beta,
            phi: sampler.phi(),
            vocabulary,
            index,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Row `k` of the topic-word matrix.
    pub fn topic(&self, k: usize) -> &[f64] {
        let v = self.vocabulary.len();
        &self.phi[k * v..(k + 1) * v]
    }

    /// The `n` most probable words of topic `k`, ties broken by word.
    pub fn top_words(&self, k: usize, n: usize) -> Vec<&str> {
        let row = self.topic(k);
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then_with(|| self.vocabulary[a].cmp(&self.vocabulary[b])));
        ids.into_iter().take(n).map(|i| self.vocabulary[i].as_str()).collect()
    }

    /// The word's topic profile `phi[·][w]`, normalized to sum to one.
    pub fn topic_vector(&self, word: &str) -> Result<Vec<f64>> {
        let &w = self
            .index
            .get(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))?;
        let v = self.vocabulary.len();
        let column: Vec<f64> = (0..self.num_topics).map(|k| self.phi[k * v + w]).collect();
        let total: f64 = column.iter().sum();
        Ok(column.into_iter().map(|p| p / total).collect())
    }

    /// Text format: `"K V alpha beta"`, the vocabulary line, then `K` rows of `V` probabilities.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<writer>", e);
        writeln!(w, "{} {} {} {}", self.num_topics, self.vocabulary.len(), self.alpha, self.beta).map_err(io)?;
        writeln!(w, "{}", self.vocabulary.join(" ")).map_err(io)?;
        for k in 0..self.num_topics {
            let row: Vec<String> = self.topic(k).iter().map(|p| p.to_string()).collect();
            writeln!(w, "{}", row.join(" ")).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut next = |lineno: usize| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::parse(lineno, "unexpected end of file"))?
                .map_err(|e| Error::parse(lineno, e.to_string()))
        };
        let header = next(1)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(1, "header must be \"K V alpha beta\""));
        }
        let bad = |s: &str| Error::parse(1, format!("bad header field {s:?}"));
        let k: usize = fields[0].parse().map_err(|_| bad(fields[0]))?;
        let v: usize = fields[1].parse().map_err(|_| bad(fields[1]))?;
        let alpha: f64 = fields[2].parse().map_err(|_| bad(fields[2]))?;
        let beta: f64 = fields[3].parse().map_err(|_| bad(fields[3]))?;
        let vocabulary: Vec<String> = next(2)?.split_whitespace().map(str::to_owned).collect();
        if vocabulary.len() != v {
            return Err(Error::parse(2, format!("expected {v} words, found {}", vocabulary.len())));
        }
        let mut phi = Vec::with_capacity(k * v);
        for row in 0..k {
            let lineno = row + 3;
            let values = next(lineno)?
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|_| Error::parse(lineno, format!("bad value {s:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != v {
                return Err(Error::parse(lineno, format!("expected {v} values, found {}", values.len())));
            }
            phi.extend(values);
        }
        let index = vocabulary.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(LdaModel {
            num_topics: k,
            alpha,
            beta,
            phi,
            vocabulary,
            index,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        LdaModel::read_text(BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_text(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Free-function form of [`LdaModel::train`].
pub fn train_lda(corpus: &Corpus, config: &LdaConfig) -> Result<LdaModel> {
    LdaModel::train(corpus, config)
}
