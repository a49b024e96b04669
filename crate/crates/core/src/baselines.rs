//! Comparison baselines: spherical k-means and the eigengap estimate of the
//! number of clusters.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::affinity::AffinityMatrix;
use crate::clustering::{ClusterSource, Clustering};
use crate::eigen::{symmetric_eigen, EigenError};
use crate::embeddings::EmbeddingSet;

pub const DEFAULT_KMEANS_ITERATIONS: usize = 300;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BaselineError {
    #[error("k = {k} exceeds the number of items ({n})")]
    TooManyClusters { k: usize, n: usize },
    #[error("invalid k-means configuration: {0}")]
    InvalidConfig(String),
    #[error("eigengap needs at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iterations: usize,
    pub n_restarts: usize,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iterations: DEFAULT_KMEANS_ITERATIONS,
            n_restarts: DEFAULT_RESTARTS,
            seed: 0,
        }
    }
}

/// Outcome of one k-means run.
#[derive(Debug, Clone)]
pub struct KMeansRun {
    pub assignment: Vec<usize>,
    /// Sum of cosine similarities to the assigned centroid.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every iteration.
    pub history: Vec<f64>,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// k-means++ seeding where the sampling weight is the cosine distance to the
/// nearest chosen centroid (the squared chordal distance between unit
/// vectors, up to a factor 2).
fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| (1.0 - dot(p, &centroids[0])).max(0.0))
        .collect();
    while centroids.len() < k {
        let total: f64 = (0..n).filter(|&i| !chosen[i]).map(|i| nearest[i]).sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for i in (0..n).filter(|&i| !chosen[i]) {
                if nearest[i] > 0.0 {
                    pick = Some(i);
                    if target < nearest[i] {
                        break;
                    }
                    target -= nearest[i];
                }
            }
            pick.expect("positive total implies a candidate")
        } else {
            // Every remaining point duplicates a centroid.
            (0..n).find(|&i| !chosen[i]).expect("k <= n")
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min((1.0 - dot(p, &points[pick])).max(0.0));
        }
    }
    centroids
}

fn nearest_centroid(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let s = dot(p, centroid);
        if s > best.1 {
            best = (c, s);
        }
    }
    best
}

/// Single Lloyd-style run of spherical k-means from k-means++ seeds.
pub fn kmeans_run(points: &[Vec<f64>], k: usize, max_iterations: usize, seed: u64) -> KMeansRun {
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut assignment = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iterations {
        iterations += 1;
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, _) = nearest_centroid(p, &centroids);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }

        // Re-seed empty clusters from the point least similar to its own
        // centroid, taken from a cluster that can spare it.
        let mut sizes = vec![0usize; k];
        assignment.iter().for_each(|&c| sizes[c] += 1);
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| sizes[assignment[i]] > 1)
                .min_by(|&a, &b| {
                    dot(&points[a], &centroids[assignment[a]])
                        .total_cmp(&dot(&points[b], &centroids[assignment[b]]))
                        .then(a.cmp(&b))
                })
                .expect("n >= k leaves a cluster with two members");
            sizes[assignment[donor]] -= 1;
            sizes[empty] = 1;
            assignment[donor] = empty;
            centroids[empty] = points[donor].clone();
            changed = true;
        }

        for (c, centroid) in centroids.iter_mut().enumerate() {
            let mut sum = vec![0.0; centroid.len()];
            for (p, _) in points.iter().zip(&assignment).filter(|(_, &a)| a == c) {
                sum.iter_mut().zip(p).for_each(|(s, x)| *s += x);
            }
            let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
            // A zero mean (antipodal members) keeps the previous direction.
            if norm > 0.0 {
                *centroid = sum.iter().map(|x| x / norm).collect();
            }
        }

        let objective = points
            .iter()
            .zip(&assignment)
            .map(|(p, &c)| dot(p, &centroids[c]))
            .sum();
        history.push(objective);

        if !changed {
            converged = true;
            break;
        }
    }

    KMeansRun {
        objective: *history.last().unwrap_or(&f64::NEG_INFINITY),
        assignment,
        iterations,
        converged,
        history,
    }
}

/// Spherical k-means: best of `n_restarts` seeded runs by objective (ties
/// toward the lower restart index). Clusters are ranked by descending size
/// and carry uniform weights.
pub fn kmeans_cosine(
    set: &EmbeddingSet,
    config: &KMeansConfig,
) -> Result<Clustering, BaselineError> {
    let n = set.len();
    if config.k == 0 || config.max_iterations == 0 || config.n_restarts == 0 {
        return Err(BaselineError::InvalidConfig(
            "k, max_iterations and n_restarts must be positive".into(),
        ));
    }
    if config.k > n {
        return Err(BaselineError::TooManyClusters { k: config.k, n });
    }
    let points: Vec<Vec<f64>> = (0..n).map(|i| unit(set.vector(i))).collect();
    let runs: Vec<KMeansRun> = (0..config.n_restarts)
        .into_par_iter()
        .map(|r| {
            kmeans_run(
                &points,
                config.k,
                config.max_iterations,
                config.seed.wrapping_add(r as u64),
            )
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.objective.total_cmp(&b.objective).then(ib.cmp(ia)))
        .map(|(_, run)| run)
        .expect("at least one restart");

    let mut clustering = Clustering::from_assignments(&best.assignment, ClusterSource::Kmeans);
    for cluster in &mut clustering.clusters {
        cluster.converged = best.converged;
        cluster.iterations = best.iterations;
    }
    clustering.params = BTreeMap::from([
        ("k".to_owned(), config.k as f64),
        ("max_iterations".to_owned(), config.max_iterations as f64),
        ("n_restarts".to_owned(), config.n_restarts as f64),
        ("seed".to_owned(), config.seed as f64),
        ("objective".to_owned(), best.objective),
    ]);
    Ok(clustering)
}

/// `I - D^{-1/2} A D^{-1/2}`, row-major. Zero-degree rows get a unit
/// diagonal and no off-diagonal entries.
pub fn normalized_laplacian(a: &AffinityMatrix) -> Vec<f64> {
    let n = a.n();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = a.row(i).iter().sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let off = -inv_sqrt[i] * a.get(i, j) * inv_sqrt[j];
            l[i * n + j] = if i == j { 1.0 + off } else { off };
        }
    }
    l
}

/// Position of the largest gap in the ascending normalized-Laplacian
/// spectrum, searched over `k in 1..n`; ties toward the smaller `k`.
pub fn eigengap_estimate(a: &AffinityMatrix) -> Result<usize, BaselineError> {
    let n = a.n();
    if n < 2 {
        return Err(BaselineError::TooSmall(n));
    }
    let eig = symmetric_eigen(&normalized_laplacian(a), n)?;
    Ok(largest_gap(&eig.values))
}

/// 1-based index `k` maximizing `values[k] - values[k-1]`.
pub fn largest_gap(ascending: &[f64]) -> usize {
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..ascending.len() {
        let gap = ascending[k] - ascending[k - 1];
        if gap > best.1 {
            best = (k, gap);
        }
    }
    best.0
}
