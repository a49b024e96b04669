//! Labeled embedding sets: validation, CSV persistence and synthetic data.
//!
//! The CSV layout is `id,label,f0,f1,...,f{m-1}`. The `label` column is either
//! filled on every row or empty on every row.

use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

/// Errors raised while building, loading or generating embedding sets.
#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("embedding set is empty")]
    Empty,
    #[error("item `{id}` has dimension {found}, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("item `{id}` has no feature columns")]
    NoFeatures { id: String },
    #[error("item `{id}` has a zero-norm vector")]
    ZeroNorm { id: String },
    #[error("item `{id}` has a non-finite feature value")]
    NonFinite { id: String },
    #[error("duplicate item id `{id}`")]
    DuplicateId { id: String },
    #[error("item `{id}`: feature column {column} is not numeric: `{value}`")]
    NonNumeric {
        id: String,
        column: usize,
        value: String,
    },
    #[error("labels must be present on every row or on none (item `{id}` differs)")]
    MixedLabels { id: String },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("cannot place {n_clusters} orthogonal centroids in dimension {dim}")]
    TooFewDimensions { n_clusters: usize, dim: usize },
    #[error("invalid synthesis parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One row of an embedding set.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub id: String,
    pub label: Option<String>,
    pub vector: Vec<f64>,
}

/// A validated collection of equal-dimension, nonzero feature vectors.
///
/// Construction goes through [`EmbeddingSet::new`], so every instance has
/// unique ids, a common dimension `m >= 1`, no zero-norm vectors, and either
/// all items labeled or none.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    items: Vec<Item>,
    dim: usize,
}

/// Ground-truth labels mapped onto dense indices.
///
/// Label indices follow the lexicographic order of the label strings, which
/// makes every downstream tie-break independent of row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    names: Vec<String>,
    of_item: Vec<usize>,
}

impl GroundTruth {
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let names: Vec<String> = labels
            .iter()
            .map(|s| s.as_ref().to_owned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let of_item = labels
            .iter()
            .map(|s| {
                names
                    .binary_search_by(|n| n.as_str().cmp(s.as_ref()))
                    .expect("label collected above")
            })
            .collect();
        Self { names, of_item }
    }

    /// Number of labeled items.
    pub fn n_items(&self) -> usize {
        self.of_item.len()
    }

    /// Number of distinct labels.
    pub fn n_labels(&self) -> usize {
        self.names.len()
    }

    pub fn label_names(&self) -> &[String] {
        &self.names
    }

    pub fn label_of(&self, item: usize) -> usize {
        self.of_item[item]
    }

    pub fn label_indices(&self) -> &[usize] {
        &self.of_item
    }

    pub fn name(&self, label: usize) -> &str {
        &self.names[label]
    }
}

impl EmbeddingSet {
    pub fn new(items: Vec<Item>) -> Result<Self, EmbeddingError> {
        let first = items.first().ok_or(EmbeddingError::Empty)?;
        let dim = first.vector.len();
        if dim == 0 {
            return Err(EmbeddingError::NoFeatures {
                id: first.id.clone(),
            });
        }
        let labeled = first.label.is_some();
        let mut seen = HashSet::with_capacity(items.len());
        for item in &items {
            if item.vector.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    id: item.id.clone(),
                    expected: dim,
                    found: item.vector.len(),
                });
            }
            if item.vector.iter().any(|v| !v.is_finite()) {
                return Err(EmbeddingError::NonFinite {
                    id: item.id.clone(),
                });
            }
            if item.vector.iter().all(|&v| v == 0.0) {
                return Err(EmbeddingError::ZeroNorm {
                    id: item.id.clone(),
                });
            }
            if item.label.is_some() != labeled {
                return Err(EmbeddingError::MixedLabels {
                    id: item.id.clone(),
                });
            }
            if !seen.insert(item.id.as_str()) {
                return Err(EmbeddingError::DuplicateId {
                    id: item.id.clone(),
                });
            }
        }
        Ok(Self { items, dim })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.items[i].vector
    }

    pub fn id(&self, i: usize) -> &str {
        &self.items[i].id
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|it| it.id.as_str())
    }

    pub fn is_labeled(&self) -> bool {
        self.items[0].label.is_some()
    }

    /// Ground truth for a labeled set, `None` when the set carries no labels.
    pub fn truth(&self) -> Option<GroundTruth> {
        let labels: Option<Vec<&str>> = self.items.iter().map(|it| it.label.as_deref()).collect();
        labels.map(|l| GroundTruth::from_labels(&l))
    }

    /// Returns the position of `id`, if present.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.items.iter().position(|it| it.id == id)
    }
}

/// Input formats accepted by [`load_embeddings`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmbeddingFormat {
    #[default]
    Csv,
}

/// Reads and validates an embedding set. Row order is preserved.
pub fn load_embeddings<R: Read>(
    source: R,
    format: EmbeddingFormat,
) -> Result<EmbeddingSet, EmbeddingError> {
    match format {
        EmbeddingFormat::Csv => load_csv(source),
    }
}

fn load_csv<R: Read>(source: R) -> Result<EmbeddingSet, EmbeddingError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();
    if header.len() < 3 {
        return Err(EmbeddingError::Header(format!(
            "expected `id,label,f0,...`, got {} column(s)",
            header.len()
        )));
    }
    if &header[0] != "id" || &header[1] != "label" {
        return Err(EmbeddingError::Header(format!(
            "first columns must be `id,label`, got `{},{}`",
            &header[0], &header[1]
        )));
    }

    let mut items = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(0).unwrap_or_default().to_owned();
        let label = match record.get(1).unwrap_or_default() {
            "" => None,
            l => Some(l.to_owned()),
        };
        let vector = record
            .iter()
            .skip(2)
            .enumerate()
            .map(|(column, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| EmbeddingError::NonNumeric {
                        id: id.clone(),
                        column,
                        value: field.to_owned(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        items.push(Item { id, label, vector });
    }
    EmbeddingSet::new(items)
}

/// Writes `set` as CSV. Values use the shortest representation that parses
/// back to the same `f64`, so save/load round-trips exactly.
pub fn save_embeddings<W: Write>(set: &EmbeddingSet, sink: W) -> Result<(), EmbeddingError> {
    let mut writer = csv::Writer::from_writer(sink);
    let mut header = vec!["id".to_owned(), "label".to_owned()];
    header.extend((0..set.dim()).map(|k| format!("f{k}")));
    writer.write_record(&header)?;
    for item in set.items() {
        let mut row = Vec::with_capacity(set.dim() + 2);
        row.push(item.id.clone());
        row.push(item.label.clone().unwrap_or_default());
        row.extend(item.vector.iter().map(|v| v.to_string()));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Parameters for [`synth_embeddings`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_clusters: usize,
    pub points_per_cluster: usize,
    pub dim: usize,
    pub noise_scale: f64,
    pub seed: u64,
    /// Apply a seeded random rotation to the canonical-basis centroids.
    pub rotate: bool,
}

impl SynthConfig {
    pub fn new(
        n_clusters: usize,
        points_per_cluster: usize,
        dim: usize,
        noise_scale: f64,
        seed: u64,
    ) -> Self {
        Self {
            n_clusters,
            points_per_cluster,
            dim,
            noise_scale,
            seed,
            rotate: false,
        }
    }
}

/// Generates unit-norm points around pairwise-orthogonal centroids.
///
/// Centroid `c` is the canonical basis vector `e_c` (optionally rotated by a
/// random orthogonal matrix). Each point adds i.i.d. Gaussian noise with
/// standard deviation `noise_scale` per coordinate and is renormalized.
/// Randomness comes from ChaCha8 seeded with `seed`.
///
/// Items are ordered cluster-major with ids `c{cluster}_p{point}` and labels
/// `spk{cluster}`.
pub fn synth_embeddings(config: &SynthConfig) -> Result<EmbeddingSet, EmbeddingError> {
    let SynthConfig {
        n_clusters,
        points_per_cluster,
        dim,
        noise_scale,
        seed,
        rotate,
    } = *config;
    if n_clusters == 0 || points_per_cluster == 0 || dim == 0 {
        return Err(EmbeddingError::InvalidParameter(
            "n_clusters, points_per_cluster and dim must be positive".into(),
        ));
    }
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(EmbeddingError::InvalidParameter(format!(
            "noise_scale must be a finite non-negative number, got {noise_scale}"
        )));
    }
    if dim < n_clusters {
        return Err(EmbeddingError::TooFewDimensions { n_clusters, dim });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotation = rotate.then(|| random_rotation(dim, &mut rng));
    let noise = Normal::new(0.0, noise_scale)
        .map_err(|e| EmbeddingError::InvalidParameter(format!("noise distribution: {e}")))?;

    let mut items = Vec::with_capacity(n_clusters * points_per_cluster);
    for c in 0..n_clusters {
        let centroid: Vec<f64> = match &rotation {
            // Column c of the rotation is the image of e_c.
            Some(q) => (0..dim).map(|r| q[r * dim + c]).collect(),
            None => (0..dim).map(|r| if r == c { 1.0 } else { 0.0 }).collect(),
        };
        for p in 0..points_per_cluster {
            let mut v = centroid.clone();
            if noise_scale > 0.0 {
                for x in v.iter_mut() {
                    *x += noise.sample(&mut rng);
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.iter_mut().for_each(|x| *x /= norm);
                }
            }
            items.push(Item {
                id: format!("c{c}_p{p}"),
                label: Some(format!("spk{c}")),
                vector: v,
            });
        }
    }
    EmbeddingSet::new(items)
}

/// Row-major `dim x dim` orthogonal matrix from Gram-Schmidt on a Gaussian
/// matrix.
fn random_rotation(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut degenerate = false;
        for _ in 0..dim {
            let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            // Two passes of modified Gram-Schmidt keep orthogonality tight.
            for _ in 0..2 {
                for u in &cols {
                    let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
        if !degenerate {
            let mut q = vec![0.0; dim * dim];
            for (c, col) in cols.iter().enumerate() {
                for (r, &x) in col.iter().enumerate() {
                    q[r * dim + c] = x;
                }
            }
            return q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<EmbeddingSet, EmbeddingError> {
        load_embeddings(text.as_bytes(), EmbeddingFormat::Csv)
    }

    #[test]
    fn loads_minimal_csv() {
        let set = load("id,label,f0,f1\na,spk1,1.0,0.0\nb,spk2,0.0,1.0\n").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.dim(), 2);
        assert_eq!(set.id(1), "b");
        let truth = set.truth().unwrap();
        assert_eq!(truth.label_names(), ["spk1", "spk2"]);
        assert_eq!(truth.label_indices(), [0, 1]);
    }

    #[test]
    fn dimension_mismatch_names_row() {
        let err = load("id,label,f0,f1,f2,f3\na,x,1,2,3\nb,x,1,2,3,4\n").unwrap_err();
        match err {
            EmbeddingError::DimensionMismatch {
                id,
                expected,
                found,
            } => {
                assert_eq!((id.as_str(), expected, found), ("b", 3, 4));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn zero_norm_names_row() {
        let err = load("id,label,f0,f1\na,spk1,1.0,0.0\nc,spk1,0.0,0.0\n").unwrap_err();
        assert!(matches!(err, EmbeddingError::ZeroNorm { ref id } if id == "c"));
    }

    #[test]
    fn rejects_duplicates_mixed_labels_and_text() {
        assert!(matches!(
            load("id,label,f0\na,x,1\na,y,2\n").unwrap_err(),
            EmbeddingError::DuplicateId { .. }
        ));
        assert!(matches!(
            load("id,label,f0\na,x,1\nb,,2\n").unwrap_err(),
            EmbeddingError::MixedLabels { ref id } if id == "b"
        ));
        assert!(matches!(
            load("id,label,f0\na,x,one\n").unwrap_err(),
            EmbeddingError::NonNumeric { .. }
        ));
        assert!(matches!(
            load("name,label,f0\na,x,1\n").unwrap_err(),
            EmbeddingError::Header(_)
        ));
    }

    #[test]
    fn unlabeled_set_has_no_truth() {
        let set = load("id,label,f0\na,,1\nb,,2e-3\n").unwrap();
        assert!(!set.is_labeled());
        assert!(set.truth().is_none());
    }

    #[test]
    fn noise_free_synth_is_duplicated_and_orthogonal() {
        let set = synth_embeddings(&SynthConfig::new(2, 2, 8, 0.0, 7)).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.vector(0), set.vector(1));
        assert_eq!(set.vector(2), set.vector(3));
        let dot: f64 = set
            .vector(0)
            .iter()
            .zip(set.vector(2))
            .map(|(a, b)| a * b)
            .sum();
        assert_eq!(dot, 0.0);
    }

    #[test]
    fn rotated_centroids_stay_orthonormal() {
        let mut cfg = SynthConfig::new(3, 1, 5, 0.0, 11);
        cfg.rotate = true;
        let set = synth_embeddings(&cfg).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = set
                    .vector(i)
                    .iter()
                    .zip(set.vector(j))
                    .map(|(a, b)| a * b)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn synth_rejects_too_few_dimensions() {
        let err = synth_embeddings(&SynthConfig::new(10, 2, 4, 0.1, 0)).unwrap_err();
        assert!(matches!(err, EmbeddingError::TooFewDimensions { .. }));
        assert!(synth_embeddings(&SynthConfig::new(2, 2, 4, -1.0, 0)).is_err());
    }

    #[test]
    fn synth_is_seed_deterministic() {
        let a = synth_embeddings(&SynthConfig::new(3, 4, 6, 0.2, 5)).unwrap();
        let b = synth_embeddings(&SynthConfig::new(3, 4, 6, 0.2, 5)).unwrap();
        let c = synth_embeddings(&SynthConfig::new(3, 4, 6, 0.2, 6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
