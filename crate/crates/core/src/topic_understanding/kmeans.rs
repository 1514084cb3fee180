//! Lloyd's algorithm with k-means++ seeding.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::squared_distance;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Point indices per cluster, each ascending.
    pub clusters: Vec<Vec<usize>>,
    pub centroids: Vec<Vec<f64>>,
    /// Cluster of each point.
    pub assignments: Vec<usize>,
    /// Inertia after every assignment step, followed by the final inertia.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| squared_distance(p, &points[first])).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let x = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in dist.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > x {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| dist.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // every remaining point coincides with a centroid
            chosen.iter().position(|&c| !c).unwrap()
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &points[pick]));
        }
    }
    centroids
}

fn recompute(points: &[Vec<f64>], assignments: &[usize], centroids: &mut [Vec<f64>]) -> Vec<usize> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
        if n > 0 {
            *c = s.into_iter().map(|x| x / n as f64).collect();
        }
    }
    counts
}

fn inertia(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| squared_distance(p, &centroids[a]))
        .sum()
}

/// Partitions `points` into `k` clusters by Euclidean distance.
///
/// Assignment ties go to the lower cluster index. A cluster left empty takes
/// the point farthest from its current centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, max_iterations: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k-means needs 1 <= k <= {n} points, got k = {k}"
        )));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < max_iterations.max(1) {
        iterations += 1;
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, _) = nearest(p, &centroids);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        history.push(inertia(points, &assignments, &centroids));
        if !changed {
            break;
        }
        let mut counts = recompute(points, &assignments, &mut centroids);
        while let Some(empty) = counts.iter().position(|&c| c == 0) {
            let (far, _) = points
                .iter()
                .enumerate()
                .filter(|&(i, _)| counts[assignments[i]] > 1)
                .map(|(i, p)| (i, squared_distance(p, &centroids[assignments[i]])))
                .fold((usize::MAX, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            assignments[far] = empty;
            counts = recompute(points, &assignments, &mut centroids);
        }
    }

    let mut final_centroids = centroids.clone();
    recompute(points, &assignments, &mut final_centroids);
    centroids = final_centroids;
    history.push(inertia(points, &assignments, &centroids));

    let mut clusters = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        clusters[a].push(i);
    }
    Ok(KMeansResult {
        clusters,
        centroids,
        assignments,
        inertia_history: history,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn four() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![10.0, 10.0], vec![10.0, 11.0]]
    }

    #[test]
    fn separated_pairs() {
        let r = kmeans(&four(), 2, 100, 0).unwrap();
        let mut clusters = r.clusters.clone();
        clusters.sort();
        assert_eq!(clusters, vec![vec![0, 1], vec![2, 3]]);
        let mut cents = r.centroids.clone();
        cents.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(cents, vec![vec![0.0, 0.5], vec![10.0, 10.5]]);
    }

    #[test]
    fn one_cluster_is_mean() {
        let r = kmeans(&four(), 1, 100, 0).unwrap();
        assert_eq!(r.centroids, vec![vec![5.0, 5.5]]);
        assert_eq!(r.clusters, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn k_equals_n_is_singletons() {
        let r = kmeans(&four(), 4, 100, 3).unwrap();
        assert!(r.clusters.iter().all(|c| c.len() == 1));
        assert_eq!(r.inertia(), 0.0);
    }

    #[test]
    fn duplicate_points_with_k_equal_n() {
        let pts = vec![vec![1.0], vec![1.0], vec![1.0]];
        let r = kmeans(&pts, 3, 10, 0).unwrap();
        assert!(r.clusters.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn k_too_large() {
        assert!(kmeans(&four(), 5, 10, 0).is_err());
        assert!(kmeans(&four(), 0, 10, 0).is_err());
    }

    proptest! {
        #[test]
        fn inertia_non_increasing_and_partition(
            pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 3..40),
            k in 1usize..6,
            seed in any::<u64>(),
        ) {
            let k = k.min(pts.len());
            let r = kmeans(&pts, k, 100, seed).unwrap();
            for w in r.inertia_history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", r.inertia_history);
            }
            let mut all: Vec<usize> = r.clusters.concat();
            all.sort();
            prop_assert_eq!(all, (0..pts.len()).collect::<Vec<_>>());
            prop_assert!(r.clusters.iter().all(|c| !c.is_empty()));
        }
    }
}
