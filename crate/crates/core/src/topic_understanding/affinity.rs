//! Affinity Propagation by responsibility / availability message passing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Self-similarity placed on the diagonal before message passing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Preference {
    /// Median of the off-diagonal similarities.
    Median,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinityResult {
    /// Exemplar index of every point.
    pub assignments: Vec<usize>,
    /// Sorted ascending.
    pub exemplars: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

/// Consecutive iterations the exemplar set must stay fixed to stop early.
pub const CONVERGENCE_ITERATIONS: usize = 10;

fn check_square(similarity: &[Vec<f64>]) -> Result<usize> {
    let n = similarity.len();
    if let Some(row) = similarity.iter().find(|r| r.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "similarity matrix must be square: {n} rows but a row of length {}",
            row.len()
        )));
    }
    Ok(n)
}

/// Median of the off-diagonal entries (0 when there are none).
pub fn median_off_diagonal(similarity: &[Vec<f64>]) -> f64 {
    let mut vals: Vec<f64> = similarity
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(move |&(k, _)| k != i).map(|(_, &s)| s))
        .collect();
    if vals.is_empty() {
        return 0.0;
    }
    vals.sort_by(f64::total_cmp);
    let m = vals.len();
    if m % 2 == 1 {
        vals[m / 2]
    } else {
        0.5 * (vals[m / 2 - 1] + vals[m / 2])
    }
}

/// Copies `similarity`, sets the diagonal to the preference, and adds a
/// seeded perturbation of relative size ~1e-12 that breaks exact ties
/// between otherwise symmetric points.
pub fn prepare_similarity(similarity: &[Vec<f64>], preference: Preference, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = check_square(similarity)?;
    let pref = match preference {
        Preference::Median => median_off_diagonal(similarity),
        Preference::Value(v) => v,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = similarity.to_vec();
    for (i, row) in s.iter_mut().enumerate() {
        row[i] = pref;
        for x in row.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x += (1e-12 * x.abs() + 1e-15) * z;
        }
    }
    debug_assert_eq!(s.len(), n);
    Ok(s)
}

/// Runs message passing on a prepared matrix (diagonal already holds the preference).
pub fn affinity_propagation_prepared(s: &[Vec<f64>], damping: f64, max_iterations: usize) -> Result<AffinityResult> {
    let n = check_square(s)?;
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidArgument(format!("damping must lie in (0, 1), got {damping}")));
    }
    if n == 0 {
        return Ok(AffinityResult {
            assignments: vec![],
            exemplars: vec![],
            iterations: 0,
            converged: true,
        });
    }
    if n == 1 {
        return Ok(AffinityResult {
            assignments: vec![0],
            exemplars: vec![0],
            iterations: 0,
            converged: true,
        });
    }

    let mut r = vec![vec![0.0; n]; n];
    let mut a = vec![vec![0.0; n]; n];
    let mut exemplars: Vec<usize> = Vec::new();
    let mut stable = 0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        iterations += 1;

        // r(i,k) <- s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        for i in 0..n {
            let (mut first, mut first_k, mut second) = (f64::NEG_INFINITY, 0, f64::NEG_INFINITY);
            for k in 0..n {
                let v = a[i][k] + s[i][k];
                if v > first {
                    second = first;
                    first = v;
                    first_k = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == first_k { second } else { first };
                let new = s[i][k] - competitor;
                r[i][k] = damping * r[i][k] + (1.0 - damping) * new;
            }
        }

        // a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))   (i != k)
        // a(k,k) <- sum_{i' != k} max(0, r(i',k))
        for k in 0..n {
            let positive: f64 = (0..n).filter(|&i| i != k).map(|i| r[i][k].max(0.0)).sum();
            for i in 0..n {
                let new = if i == k {
                    positive
                } else {
                    (r[k][k] + positive - r[i][k].max(0.0)).min(0.0)
                };
                a[i][k] = damping * a[i][k] + (1.0 - damping) * new;
            }
        }

        let current: Vec<usize> = (0..n).filter(|&k| a[k][k] + r[k][k] > 0.0).collect();
        if !current.is_empty() && current == exemplars {
            stable += 1;
            if stable >= CONVERGENCE_ITERATIONS {
                converged = true;
                break;
            }
        } else {
            stable = 1;
            exemplars = current;
        }
    }

    if exemplars.is_empty() {
        let best = (0..n)
            .max_by(|&x, &y| (a[x][x] + r[x][x]).total_cmp(&(a[y][y] + r[y][y])).then(y.cmp(&x)))
            .unwrap();
        exemplars = vec![best];
    }
    Ok(AffinityResult {
        assignments: assign_to_exemplars(s, &exemplars),
        exemplars,
        iterations,
        converged,
    })
}

/// Each exemplar maps to itself; every other point to its most similar exemplar
/// (ties to the lower index).
pub fn assign_to_exemplars(s: &[Vec<f64>], exemplars: &[usize]) -> Vec<usize> {
    (0..s.len())
        .map(|i| {
            if exemplars.contains(&i) {
                return i;
            }
            let mut best = exemplars[0];
            for &e in &exemplars[1..] {
                if s[i][e] > s[i][best] {
                    best = e;
                }
            }
            best
        })
        .collect()
}

/// Clusters from a raw similarity matrix. See [`prepare_similarity`] for the
/// diagonal and tie-breaking treatment.
pub fn affinity_propagation(
    similarity: &[Vec<f64>],
    damping: f64,
    max_iterations: usize,
    preference: Preference,
    seed: u64,
) -> Result<AffinityResult> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidArgument(format!("damping must lie in (0, 1), got {damping}")));
    }
    let s = prepare_similarity(similarity, preference, seed)?;
    affinity_propagation_prepared(&s, damping, max_iterations)
}
