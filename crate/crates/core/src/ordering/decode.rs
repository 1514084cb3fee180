//! Decoders maximizing the chain objective `Σ_t scores[π_t][π_{t+1}]` over
//! permutations that begin at a fixed start sentence.

use std::cmp::Ordering as Cmp;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CoherenceMatrix, Ordering};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_N: usize = 12;
/// Hard ceiling for the exact decoder (2^n · n states).
pub const MAX_EXACT_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    Greedy,
    ExactDp { max_n: usize },
    Beam { width: usize },
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::Greedy => "greedy",
            Decoder::ExactDp { .. } => "dp",
            Decoder::Beam { .. } => "beam",
        }
    }

    pub fn decode(&self, matrix: &CoherenceMatrix, start: usize) -> Result<Ordering> {
        match *self {
            Decoder::Greedy => order_greedy(matrix, start),
            Decoder::ExactDp { max_n } => order_exact_dp(matrix, start, max_n),
            Decoder::Beam { width } => order_beam(matrix, start, width),
        }
    }
}

fn check_start(matrix: &CoherenceMatrix, start: usize) -> Result<()> {
    if start >= matrix.len() {
        return Err(Error::InvalidArgument(format!(
            "start {start} out of range for {} sentences",
            matrix.len()
        )));
    }
    Ok(())
}

/// Starting at `start`, repeatedly appends the unvisited sentence with the
/// highest score from the current one; ties go to the smallest index.
pub fn order_greedy(matrix: &CoherenceMatrix, start: usize) -> Result<Ordering> {
    check_start(matrix, start)?;
    let n = matrix.len();
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut order = Vec::with_capacity(n);
    order.push(start);
    let mut current = start;
    for _ in 1..n {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !visited[j]) {
            let s = matrix.get(current, j);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        let (next, _) = best.expect("an unvisited sentence remains");
        visited[next] = true;
        order.push(next);
        current = next;
    }
    Ok(Ordering(order))
}

/// Exact maximizer of the chain objective by dynamic programming over
/// `(visited set, last sentence)` states.
///
/// Scores accumulate left to right, as in [`CoherenceMatrix::chain_score`],
/// so the optimum is exact in floating point. Among prefixes reaching the
/// same state with equal score the lexicographically smaller one is kept.
pub fn order_exact_dp(matrix: &CoherenceMatrix, start: usize, max_n: usize) -> Result<Ordering> {
    check_start(matrix, start)?;
    let n = matrix.len();
    if n > max_n.min(MAX_EXACT_N) {
        return Err(Error::InvalidArgument(format!(
            "exact decoding supports at most {} sentences, got {n}; use the beam decoder",
            max_n.min(MAX_EXACT_N)
        )));
    }
    if n == 1 {
        return Ok(Ordering(vec![start]));
    }
    let full = (1usize << n) - 1;
    let idx = |mask: usize, last: usize| mask * n + last;
    let mut best = vec![f64::NEG_INFINITY; (full + 1) * n];
    let mut parent = vec![usize::MAX; (full + 1) * n];
    best[idx(1 << start, start)] = 0.0;

    let path = |parent: &[usize], mut mask: usize, mut last: usize| {
        let mut p = Vec::with_capacity(n);
        loop {
            p.push(last);
            let prev = parent[idx(mask, last)];
            if prev == usize::MAX {
                break;
            }
            mask &= !(1 << last);
            last = prev;
        }
        p.reverse();
        p
    };

    for mask in 0..=full {
        if mask & (1 << start) == 0 {
            continue;
        }
        for last in 0..n {
            let here = best[idx(mask, last)];
            if mask & (1 << last) == 0 || here == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let next = mask | (1 << j);
                let cand = here + matrix.get(last, j);
                let slot = idx(next, j);
                let better = match cand.total_cmp(&best[slot]) {
                    Cmp::Greater => true,
                    Cmp::Less => false,
                    Cmp::Equal => path(&parent, mask, last) < path(&parent, mask, parent[slot]),
                };
                if better {
                    best[slot] = cand;
                    parent[slot] = last;
                }
            }
        }
    }

    let mut winner: Option<(usize, Vec<usize>)> = None;
    for last in 0..n {
        if best[idx(full, last)] == f64::NEG_INFINITY {
            continue;
        }
        let p = path(&parent, full, last);
        winner = match winner {
            None => Some((last, p)),
            Some((w, wp)) => match best[idx(full, last)].total_cmp(&best[idx(full, w)]) {
                Cmp::Greater => Some((last, p)),
                Cmp::Equal if p < wp => Some((last, p)),
                _ => Some((w, wp)),
            },
        };
    }
    Ok(Ordering(winner.expect("full permutation reachable").1))
}

#[derive(Clone)]
struct Partial {
    order: Vec<usize>,
    visited: Vec<u64>,
    score: f64,
    last_step: f64,
}

impl Partial {
    fn rank(&self, other: &Partial) -> Cmp {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| other.last_step.total_cmp(&self.last_step))
            .then_with(|| self.order.cmp(&other.order))
    }
}

/// Beam search over partial orders ranked by chain score.
///
/// Partial orders that reach the same `(visited set, last sentence)` state
/// are merged, keeping the best. Ranking ties fall to the higher final step
/// score and then to the lexicographically smaller partial order, so a width
/// of 1 reproduces [`order_greedy`] exactly.
pub fn order_beam(matrix: &CoherenceMatrix, start: usize, width: usize) -> Result<Ordering> {
    check_start(matrix, start)?;
    if width == 0 {
        return Err(Error::InvalidArgument("beam width must be at least 1".into()));
    }
    let n = matrix.len();
    let words = n.div_ceil(64);
    let mut visited = vec![0u64; words];
    visited[start / 64] |= 1 << (start % 64);
    let mut beam = vec![Partial {
        order: vec![start],
        visited,
        score: 0.0,
        last_step: 0.0,
    }];
    for _ in 1..n {
        let mut states: HashMap<(Vec<u64>, usize), Partial> = HashMap::new();
        for p in &beam {
            let last = *p.order.last().unwrap();
            for j in 0..n {
                if p.visited[j / 64] & (1 << (j % 64)) != 0 {
                    continue;
                }
                let step = matrix.get(last, j);
                let mut order = p.order.clone();
                order.push(j);
                let mut visited = p.visited.clone();
                visited[j / 64] |= 1 << (j % 64);
                let cand = Partial {
                    order,
                    visited: visited.clone(),
                    score: p.score + step,
                    last_step: step,
                };
                match states.entry((visited, j)) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(cand);
                    }
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        if cand.rank(e.get()) == Cmp::Less {
                            e.insert(cand);
                        }
                    }
                }
            }
        }
        let mut next: Vec<Partial> = states.into_values().collect();
        next.sort_by(Partial::rank);
        next.truncate(width);
        beam = next;
    }
    Ok(Ordering(beam.swap_remove(0).order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain(n: usize) -> CoherenceMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if j == i + 1 { 1.0 } else { 0.0 }).collect())
            .collect();
        CoherenceMatrix::from_rows(&rows).unwrap()
    }

    fn random(n: usize, rng: &mut ChaCha8Rng) -> CoherenceMatrix {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
        CoherenceMatrix::from_rows(&rows).unwrap()
    }

    /// Exhaustive search, lexicographic enumeration, first maximum kept.
    fn brute_force(m: &CoherenceMatrix, start: usize) -> (Vec<usize>, f64) {
        fn rec(m: &CoherenceMatrix, order: &mut Vec<usize>, used: &mut Vec<bool>, best: &mut (Vec<usize>, f64)) {
            if order.len() == m.len() {
                let s = m.chain_score(order);
                if s > best.1 {
                    *best = (order.clone(), s);
                }
                return;
            }
            for j in 0..m.len() {
                if !used[j] {
                    used[j] = true;
                    order.push(j);
                    rec(m, order, used, best);
                    order.pop();
                    used[j] = false;
                }
            }
        }
        let mut used = vec![false; m.len()];
        used[start] = true;
        let mut best = (vec![], f64::NEG_INFINITY);
        rec(m, &mut vec![start], &mut used, &mut best);
        best
    }

    #[test]
    fn chain_matrix_recovers_identity() {
        let m = chain(6);
        assert_eq!(order_greedy(&m, 0).unwrap(), Ordering::identity(6));
        let dp = order_exact_dp(&m, 0, 12).unwrap();
        assert_eq!(dp, Ordering::identity(6));
        assert_eq!(m.chain_score(dp.as_slice()), 5.0);
        for w in [1, 2, 5, 100] {
            assert_eq!(order_beam(&m, 0, w).unwrap(), Ordering::identity(6));
        }
    }

    #[test]
    fn trivial_sizes() {
        let one = CoherenceMatrix::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(order_greedy(&one, 0).unwrap().0, vec![0]);
        assert_eq!(order_exact_dp(&one, 0, 12).unwrap().0, vec![0]);
        assert_eq!(order_beam(&one, 0, 3).unwrap().0, vec![0]);
        let two = CoherenceMatrix::from_rows(&[vec![0.0, -5.0], vec![9.0, 0.0]]).unwrap();
        assert_eq!(order_exact_dp(&two, 1, 12).unwrap().0, vec![1, 0]);
    }

    #[test]
    fn equal_scores_ascending() {
        let m = CoherenceMatrix::from_rows(&vec![vec![0.3; 5]; 5]).unwrap();
        assert_eq!(order_greedy(&m, 2).unwrap().0, vec![2, 0, 1, 3, 4]);
        assert_eq!(order_exact_dp(&m, 2, 12).unwrap().0, vec![2, 0, 1, 3, 4]);
        assert_eq!(order_beam(&m, 2, 4).unwrap().0, vec![2, 0, 1, 3, 4]);
    }

    #[test]
    fn dp_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let n = rng.gen_range(2..=7);
            let m = random(n, &mut rng);
            let start = rng.gen_range(0..n);
            let (bf, bf_score) = brute_force(&m, start);
            let dp = order_exact_dp(&m, start, 12).unwrap();
            assert_eq!(m.chain_score(dp.as_slice()), bf_score);
            assert_eq!(dp.0, bf);
        }
    }

    #[test]
    fn dp_respects_limit() {
        let m = chain(13);
        assert!(order_exact_dp(&m, 0, 12).is_err());
        assert!(order_exact_dp(&m, 0, 13).is_ok());
    }

    #[test]
    fn wide_beam_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(2..=7);
            let m = random(n, &mut rng);
            let start = rng.gen_range(0..n);
            let dp = order_exact_dp(&m, start, 12).unwrap();
            let beam = order_beam(&m, start, 1000).unwrap();
            assert_eq!(m.chain_score(beam.as_slice()), m.chain_score(dp.as_slice()));
        }
    }

    #[test]
    fn invalid_start() {
        let m = chain(3);
        assert!(order_greedy(&m, 3).is_err());
        assert!(order_exact_dp(&m, 5, 12).is_err());
        assert!(order_beam(&m, 3, 1).is_err());
        assert!(order_beam(&m, 0, 0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = CoherenceMatrix> {
            (1usize..8).prop_flat_map(|n| {
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), n)
                    .prop_map(|rows| CoherenceMatrix::from_rows(&rows).unwrap())
            })
        }

        fn is_permutation(o: &Ordering, n: usize) -> bool {
            let mut v = o.0.clone();
            v.sort();
            v == (0..n).collect::<Vec<_>>()
        }

        proptest! {
            #[test]
            fn decoder_dominance(m in matrix(), start_seed in any::<usize>(), width in 1usize..6) {
                let n = m.len();
                let start = start_seed % n;
                let g = order_greedy(&m, start).unwrap();
                let b1 = order_beam(&m, start, 1).unwrap();
                let b = order_beam(&m, start, width).unwrap();
                let dp = order_exact_dp(&m, start, 12).unwrap();
                prop_assert_eq!(&b1, &g);
                for o in [&g, &b, &dp] {
                    prop_assert!(is_permutation(o, n));
                    prop_assert_eq!(o.0[0], start);
                }
                prop_assert!(m.chain_score(&dp.0) >= m.chain_score(&b.0));
                prop_assert!(m.chain_score(&dp.0) >= m.chain_score(&g.0));
            }
        }
    }
}
