//! Brute-force reference implementations used by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use scds::AffinityMatrix;

/// Random symmetric 0/1 adjacency with empty diagonal.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let e = rng.random_bool(p);
            adj[i][j] = e;
            adj[j][i] = e;
        }
    }
    adj
}

pub fn graph_affinity(adj: &[Vec<bool>]) -> AffinityMatrix {
    let rows: Vec<Vec<f64>> = adj
        .iter()
        .map(|r| r.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect())
        .collect();
    AffinityMatrix::from_rows(&rows).unwrap()
}

pub fn is_clique(adj: &[Vec<bool>], nodes: &[usize]) -> bool {
    nodes
        .iter()
        .enumerate()
        .all(|(a, &i)| nodes[a + 1..].iter().all(|&j| adj[i][j]))
}

/// Size of a maximum clique, by subset enumeration.
pub fn max_clique_size(adj: &[Vec<bool>]) -> usize {
    let n = adj.len();
    (0u32..1 << n)
        .filter_map(|mask| {
            let nodes: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            is_clique(adj, &nodes).then_some(nodes.len())
        })
        .max()
        .unwrap_or(0)
}

/// Random symmetric non-negative matrix with zero diagonal.
pub fn random_affinity<R: Rng>(rng: &mut R, n: usize) -> AffinityMatrix {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let w = if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random::<f64>()
            };
            v[i * n + j] = w;
            v[j * n + i] = w;
        }
    }
    AffinityMatrix::from_dense(n, v).unwrap()
}

/// All injective maps from `0..k` into `0..n` (`k <= n`).
pub fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                go(k, n, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(k, n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Largest total count over one-to-one matchings of rows to columns.
pub fn best_matching(counts: &[u64], rows: usize, cols: usize) -> u64 {
    if rows <= cols {
        injections(rows, cols)
            .iter()
            .map(|m| {
                m.iter()
                    .enumerate()
                    .map(|(i, &j)| counts[i * cols + j])
                    .sum()
            })
            .max()
            .unwrap_or(0)
    } else {
        injections(cols, rows)
            .iter()
            .map(|m| {
                m.iter()
                    .enumerate()
                    .map(|(j, &i)| counts[i * cols + j])
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }
}

/// ARI by explicit pair counting.
pub fn ari_pairs(left: &[usize], right: &[usize]) -> f64 {
    let n = left.len();
    let (mut both, mut only_l, mut only_r, mut neither) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            match (left[i] == left[j], right[i] == right[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_l += 1.0,
                (false, true) => only_r += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let total: f64 = both + only_l + only_r + neither;
    let same_l = both + only_l;
    let same_r = both + only_r;
    let expected = same_l * same_r / total;
    let max = 0.5 * (same_l + same_r);
    if max == expected {
        return 0.0;
    }
    (both - expected) / (max - expected)
}
