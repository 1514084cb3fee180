//! Seeded inputs shared by the benchmarks.

use essayplan::{CoherenceMatrix, Document, EmbeddingTable, Sentence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n × n` matrix of uniform scores in `[0, 1)`.
pub fn random_matrix(n: usize, seed: u64) -> CoherenceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.gen() }).collect())
        .collect();
    CoherenceMatrix::from_rows(&rows).expect("finite scores")
}

/// Vocabulary `w0..w{vocab}` with random vectors of length `dim`.
pub fn random_table(vocab: usize, dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EmbeddingTable::from_pairs((0..vocab).map(|i| {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (format!("w{i}"), v)
    }))
    .expect("non-empty table")
}

/// `n` sentences of `len` tokens drawn from the `random_table` vocabulary.
pub fn random_sentences(n: usize, len: usize, vocab: usize, seed: u64) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let texts: Vec<String> = (0..n)
        .map(|_| {
            (0..len)
                .map(|_| format!("w{}", rng.gen_range(0..vocab)))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    Document::from_texts("bench", &refs).expect("non-empty sentences").sentences
}
