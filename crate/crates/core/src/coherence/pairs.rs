use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    TruePair,
    Corrupted,
}

/// A training pair: `s2` follows `s1` in the corpus; corrupted samples carry
/// the random replacement in `s2_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample<'a> {
    pub s1: &'a Sentence,
    pub s2: &'a Sentence,
    pub label: PairLabel,
    pub s2_star: Option<&'a Sentence>,
}

impl<'a> PairSample<'a> {
    /// The sentence actually paired with `s1`.
    pub fn second(&self) -> &'a Sentence {
        self.s2_star.unwrap_or(self.s2)
    }
}

/// One true pair per adjacent sentence pair, each followed by
/// `negatives_per_positive` corrupted copies whose replacement is drawn
/// uniformly from every corpus sentence except `s2`.
pub fn sample_pairs(corpus: &Corpus, negatives_per_positive: usize, seed: u64) -> Result<Vec<PairSample<'_>>> {
    let all: Vec<&Sentence> = corpus.sentences().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut offset = 0;
    for doc in corpus.documents() {
        for (i, pair) in doc.sentences.windows(2).enumerate() {
            let (s1, s2) = (&pair[0], &pair[1]);
            let s2_global = offset + i + 1;
            out.push(PairSample {
                s1,
                s2,
                label: PairLabel::TruePair,
                s2_star: None,
            });
            for _ in 0..negatives_per_positive {
                let mut j = rng.gen_range(0..all.len() - 1);
                if j >= s2_global {
                    j += 1;
                }
                out.push(PairSample {
                    s1,
                    s2,
                    label: PairLabel::Corrupted,
                    s2_star: Some(all[j]),
                });
            }
        }
        offset += doc.len();
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(
            "no document has two adjacent sentences to sample pairs from".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus() -> Corpus {
        Corpus::new(vec![
            Document::from_texts("a", &["x", "y", "z"]).unwrap(),
            Document::from_texts("b", &["p"]).unwrap(),
            Document::from_texts("c", &["q", "r"]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn counts_and_labels() {
        let c = Corpus::new(vec![Document::from_texts("a", &["x", "y", "z"]).unwrap()]).unwrap();
        let pairs = sample_pairs(&c, 1, 0).unwrap();
        assert_eq!(pairs.iter().filter(|p| p.label == PairLabel::TruePair).count(), 2);
        assert_eq!(pairs.iter().filter(|p| p.label == PairLabel::Corrupted).count(), 2);
    }

    #[test]
    fn replacement_never_the_true_successor() {
        let c = corpus();
        for seed in 0..50 {
            for p in sample_pairs(&c, 3, seed).unwrap() {
                match p.label {
                    PairLabel::TruePair => {
                        assert!(p.s2_star.is_none());
                        assert_eq!(p.s1.doc_id, p.s2.doc_id);
                        assert_eq!(p.s1.index + 1, p.s2.index);
                    }
                    PairLabel::Corrupted => assert_ne!(p.s2_star.unwrap().key(), p.s2.key()),
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let c = corpus();
        assert_eq!(sample_pairs(&c, 2, 11).unwrap(), sample_pairs(&c, 2, 11).unwrap());
    }

    #[test]
    fn needs_adjacent_pairs() {
        let c = Corpus::new(vec![Document::from_texts("a", &["x"]).unwrap()]).unwrap();
        assert!(sample_pairs(&c, 1, 0).is_err());
    }
}
