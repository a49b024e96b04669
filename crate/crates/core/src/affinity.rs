//! Locally scaled cosine affinity graphs.
//!
//! `a_ij = exp(-d(f_i, f_j) / (sigma_i * sigma_j))` where `d` is the cosine
//! distance and `sigma_i` is the mean distance from `i` to its `knn` nearest
//! neighbours.

use std::cell::Cell;
use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;

use crate::embeddings::EmbeddingSet;

/// Neighbourhood size used for local scaling unless overridden.
pub const DEFAULT_KNN: usize = 7;

/// Lower bound applied to every local scale.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AffinityError {
    #[error("cosine distance of a zero-norm vector")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("local scaling needs at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("knn must be positive")]
    ZeroKnn,
    #[error("matrix has {len} values, expected {n}x{n}")]
    Shape { n: usize, len: usize },
    #[error("entry ({i}, {j}) = {value} is negative or not finite")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("diagonal entry {i} is nonzero")]
    NonzeroDiagonal { i: usize },
}

/// Dense, symmetric, non-negative similarity matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl AffinityMatrix {
    /// Validates a row-major `n x n` matrix supplied by the caller.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self, AffinityError> {
        if values.len() != n * n {
            return Err(AffinityError::Shape {
                n,
                len: values.len(),
            });
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(AffinityError::NonzeroDiagonal { i });
            }
            for j in 0..n {
                let value = values[i * n + j];
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(AffinityError::InvalidEntry { i, j, value });
                }
                if value != values[j * n + i] {
                    return Err(AffinityError::Asymmetric { i, j });
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Builds from rows; convenient for small literal matrices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AffinityError> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(AffinityError::Shape {
                    n,
                    len: n * (n - 1) + row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_dense(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Restriction to `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> AffinityMatrix {
        let k = indices.len();
        let mut values = Vec::with_capacity(k * k);
        for &i in indices {
            let row = self.row(i);
            values.extend(indices.iter().map(|&j| row[j]));
        }
        AffinityMatrix { n: k, values }
    }

    /// Writes the matrix as CSV preceded by a `# n=<n>` comment line.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "# n={}", self.n)?;
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(sink, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// `1 - <u,v> / (|u| |v|)`, clamped to `[0, 2]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64, AffinityError> {
    if u.len() != v.len() {
        return Err(AffinityError::DimensionMismatch(u.len(), v.len()));
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(AffinityError::ZeroNorm);
    }
    Ok(distance_with_norms(u, nu, v, nv))
}

#[inline]
fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
fn distance_with_norms(u: &[f64], nu: f64, v: &[f64], nv: f64) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (1.0 - dot / (nu * nv)).clamp(0.0, 2.0)
}

/// Full pairwise cosine-distance matrix, row-major. Each pair is computed
/// once and mirrored, so the result is exactly symmetric.
pub fn distance_matrix(set: &EmbeddingSet) -> Vec<f64> {
    let n = set.len();
    let norms: Vec<f64> = (0..n).map(|i| norm(set.vector(i))).collect();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| distance_with_norms(set.vector(i), norms[i], set.vector(j), norms[j]))
                .collect()
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &value) in row.iter().enumerate() {
            let j = i + 1 + offset;
            d[i * n + j] = value;
            d[j * n + i] = value;
        }
    }
    d
}

fn scales_from_distances(d: &[f64], n: usize, knn: usize) -> Vec<f64> {
    let k = knn.min(n - 1);
    (0..n)
        .map(|i| {
            let mut neighbours: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (d[i * n + j], j))
                .collect();
            let by_distance_then_index =
                |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < neighbours.len() {
                neighbours.select_nth_unstable_by(k - 1, by_distance_then_index);
                neighbours.truncate(k);
            }
            // Summation order depends only on the distance values.
            neighbours.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
            let mean = neighbours.iter().map(|(dist, _)| dist).sum::<f64>() / k as f64;
            mean.max(SIGMA_FLOOR)
        })
        .collect()
}

/// Per-item local scale: mean cosine distance to the `knn` nearest other
/// items (all other items when fewer exist), floored at [`SIGMA_FLOOR`].
/// Distance ties are broken toward the lower item index.
pub fn local_scales(set: &EmbeddingSet, knn: usize) -> Result<Vec<f64>, AffinityError> {
    check_inputs(set, knn)?;
    Ok(scales_from_distances(&distance_matrix(set), set.len(), knn))
}

fn check_inputs(set: &EmbeddingSet, knn: usize) -> Result<(), AffinityError> {
    if knn == 0 {
        return Err(AffinityError::ZeroKnn);
    }
    if set.len() < 2 {
        return Err(AffinityError::TooFewItems(set.len()));
    }
    Ok(())
}

thread_local! {
    static BUILDS: Cell<usize> = const { Cell::new(0) };
}

/// Number of [`build_affinity`] calls made on the current thread.
pub fn builds_on_this_thread() -> usize {
    BUILDS.with(Cell::get)
}

/// Builds the locally scaled affinity matrix.
pub fn build_affinity(set: &EmbeddingSet, knn: usize) -> Result<AffinityMatrix, AffinityError> {
    check_inputs(set, knn)?;
    BUILDS.with(|c| c.set(c.get() + 1));
    let n = set.len();
    let d = distance_matrix(set);
    let sigma = scales_from_distances(&d, n, knn);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = (-d[i * n + j] / (sigma[i] * sigma[j])).exp();
            values[i * n + j] = a;
            values[j * n + i] = a;
        }
    }
    Ok(AffinityMatrix { n, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::Item;

    fn set_of(points: &[Vec<f64>]) -> EmbeddingSet {
        EmbeddingSet::new(
            points
                .iter()
                .enumerate()
                .map(|(i, v)| Item {
                    id: format!("p{i}"),
                    label: None,
                    vector: v.clone(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_distance_examples() {
        assert_eq!(cosine_distance(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(
            cosine_distance(&[0.0, 0.0], &[1.0, 0.0]),
            Err(AffinityError::ZeroNorm)
        );
        assert_eq!(
            cosine_distance(&[1.0], &[1.0, 0.0]),
            Err(AffinityError::DimensionMismatch(1, 2))
        );
    }

    #[test]
    fn scales_with_fewer_items_than_knn() {
        let set = set_of(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(local_scales(&set, 7).unwrap(), vec![0.5, 0.5, 1.0]);
    }

    #[test]
    fn identical_points_hit_the_floor() {
        let set = set_of(&[vec![2.0, 1.0], vec![2.0, 1.0], vec![2.0, 1.0]]);
        assert_eq!(local_scales(&set, 7).unwrap(), vec![SIGMA_FLOOR; 3]);
    }

    #[test]
    fn copies_only_see_copies() {
        let mut points = vec![vec![1.0, 0.0]; 10];
        points.push(vec![0.0, 1.0]);
        let sigma = local_scales(&set_of(&points), 7).unwrap();
        assert!(sigma[..10].iter().all(|&s| s == SIGMA_FLOOR));
        // The outlier's 7 nearest neighbours are copies at distance 1.
        assert_eq!(sigma[10], 1.0);
    }

    #[test]
    fn kernel_matches_hand_evaluation() {
        let set = set_of(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let a = build_affinity(&set, 7).unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert!((a.get(0, 2) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((a.get(0, 2) - 0.135335).abs() < 1e-6);
        assert_eq!(a.get(2, 2), 0.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let one = set_of(&[vec![1.0]]);
        assert_eq!(build_affinity(&one, 7), Err(AffinityError::TooFewItems(1)));
        let two = set_of(&[vec![1.0], vec![2.0]]);
        assert_eq!(local_scales(&two, 0), Err(AffinityError::ZeroKnn));
    }

    #[test]
    fn from_dense_validates() {
        assert!(AffinityMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert_eq!(
            AffinityMatrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]),
            Err(AffinityError::Asymmetric { i: 0, j: 1 })
        );
        assert_eq!(
            AffinityMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]),
            Err(AffinityError::NonzeroDiagonal { i: 0 })
        );
        assert!(matches!(
            AffinityMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]),
            Err(AffinityError::InvalidEntry { .. })
        ));
    }

    #[test]
    fn dump_has_comment_header() {
        let a = AffinityMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let mut out = Vec::new();
        a.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "# n=2\n0,0.5\n0.5,0\n");
    }
}
