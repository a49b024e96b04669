//! Misclassification rate, average cluster purity and adjusted Rand index.
//!
//! All three work from the cluster-by-label contingency table in exact
//! integer counts; floating point only enters at the final division.

use std::collections::{BTreeMap, HashMap};

use crate::clustering::Clustering;
use crate::embeddings::GroundTruth;
use crate::labeling::{label_clusters, LabelAssignment, LabelingError, LabelingMethod};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("adjusted Rand index needs at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("partitions have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("assignment covers {assignment} clusters but the clustering has {clustering}")]
    AssignmentMismatch {
        assignment: usize,
        clustering: usize,
    },
    #[error(transparent)]
    Labeling(#[from] LabelingError),
}

/// `counts[i][j]` = number of items of label `j` in cluster `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl ContingencyTable {
    pub fn new(clustering: &Clustering, truth: &GroundTruth) -> Self {
        let rows = clustering.clusters.len();
        let cols = truth.n_labels();
        let mut counts = vec![0; rows * cols];
        for (i, cluster) in clustering.clusters.iter().enumerate() {
            for &m in &cluster.members {
                counts[i * cols + truth.label_of(m)] += 1;
            }
        }
        Self { rows, cols, counts }
    }

    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), rows * cols);
        Self { rows, cols, counts }
    }

    /// Cross-tabulates two flat partitions given as per-item group ids.
    pub fn from_partitions(left: &[usize], right: &[usize]) -> Self {
        let dense = |p: &[usize]| -> Vec<usize> {
            let mut ids: HashMap<usize, usize> = HashMap::new();
            p.iter()
                .map(|&g| {
                    let next = ids.len();
                    *ids.entry(g).or_insert(next)
                })
                .collect()
        };
        let (l, r) = (dense(left), dense(right));
        let rows = l.iter().max().map_or(0, |m| m + 1);
        let cols = r.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![0; rows * cols];
        for (&i, &j) in l.iter().zip(&r) {
            counts[i * cols + j] += 1;
        }
        Self { rows, cols, counts }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0; self.counts.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                counts[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            counts,
        }
    }
}

/// Total misclassification rate and per-label error counts `e_j`.
///
/// An item is correct iff its cluster is assigned its true label; members of
/// unassigned clusters are all errors, charged to their own labels.
pub fn misclassification_rate(
    clustering: &Clustering,
    truth: &GroundTruth,
    assignment: &LabelAssignment,
) -> Result<(f64, Vec<u64>), MetricsError> {
    if assignment.mapping.len() != clustering.clusters.len() {
        return Err(MetricsError::AssignmentMismatch {
            assignment: assignment.mapping.len(),
            clustering: clustering.clusters.len(),
        });
    }
    if truth.n_items() != clustering.n_items {
        return Err(LabelingError::TruthMismatch {
            truth: truth.n_items(),
            clustering: clustering.n_items,
        }
        .into());
    }
    let mut errors = vec![0u64; truth.n_labels()];
    for (cluster, assigned) in clustering.clusters.iter().zip(&assignment.mapping) {
        for &m in &cluster.members {
            let label = truth.label_of(m);
            if *assigned != Some(label) {
                errors[label] += 1;
            }
        }
    }
    let total: u64 = errors.iter().sum();
    Ok((total as f64 / truth.n_items() as f64, errors))
}

/// `(1/N) sum_i p_i * n_i` with `p_i = sum_j n_ij^2 / n_i^2`.
pub fn average_cluster_purity(clustering: &Clustering, truth: &GroundTruth) -> f64 {
    acp_from_table(&ContingencyTable::new(clustering, truth))
}

pub fn acp_from_table(table: &ContingencyTable) -> f64 {
    let n = table.total() as f64;
    let weighted: f64 = table
        .row_sums()
        .iter()
        .enumerate()
        .filter(|(_, &size)| size > 0)
        .map(|(i, &size)| {
            let squares: u64 = (0..table.cols()).map(|j| table.get(i, j).pow(2)).sum();
            let purity = squares as f64 / (size * size) as f64;
            purity * size as f64
        })
        .sum();
    weighted / n
}

fn comb2(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Hubert-Arabie adjusted Rand index of a contingency table. Returns 0 when
/// the index is undefined (both partitions trivial).
pub fn ari_from_table(table: &ContingencyTable) -> Result<f64, MetricsError> {
    let n = table.total();
    if n < 2 {
        return Err(MetricsError::TooFewItems(n as usize));
    }
    let index: i128 = table.counts.iter().map(|&c| comb2(c)).sum();
    let a: i128 = table.row_sums().into_iter().map(comb2).sum();
    let b: i128 = table.col_sums().into_iter().map(comb2).sum();
    let t = comb2(n);
    // (I - AB/T) / ((A+B)/2 - AB/T), scaled by 2T to stay in integers.
    let numerator = 2 * (index * t - a * b);
    let denominator = (a + b) * t - 2 * a * b;
    if denominator == 0 {
        return Ok(0.0);
    }
    Ok(numerator as f64 / denominator as f64)
}

pub fn adjusted_rand_index(
    clustering: &Clustering,
    truth: &GroundTruth,
) -> Result<f64, MetricsError> {
    ari_from_table(&ContingencyTable::new(clustering, truth))
}

/// ARI between two flat partitions given as per-item group ids.
pub fn adjusted_rand_index_partitions(
    left: &[usize],
    right: &[usize],
) -> Result<f64, MetricsError> {
    if left.len() != right.len() {
        return Err(MetricsError::LengthMismatch(left.len(), right.len()));
    }
    ari_from_table(&ContingencyTable::from_partitions(left, right))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub mr: f64,
    pub ari: f64,
    pub acp: f64,
    pub n_clusters: usize,
    pub assignment: LabelAssignment,
    /// `e_j` keyed by label name; every label is present.
    pub per_speaker_errors: BTreeMap<String, u64>,
}

impl EvaluationReport {
    pub fn to_json(&self, truth: &GroundTruth) -> serde_json::Value {
        serde_json::json!({
            "mr": self.mr,
            "ari": self.ari,
            "acp": self.acp,
            "n_clusters": self.n_clusters,
            "assignment": self.assignment.to_json(truth),
            "per_speaker_errors": self.per_speaker_errors,
        })
    }

    /// Header for [`EvaluationReport::csv_row`].
    pub const CSV_HEADER: &'static str = "mr,ari,acp,n_clusters";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.mr, self.ari, self.acp, self.n_clusters)
    }
}

/// Labels the clustering and computes every metric.
pub fn evaluate(
    clustering: &Clustering,
    truth: &GroundTruth,
    method: LabelingMethod,
) -> Result<EvaluationReport, MetricsError> {
    let assignment = label_clusters(clustering, truth, method)?;
    let (mr, errors) = misclassification_rate(clustering, truth, &assignment)?;
    let table = ContingencyTable::new(clustering, truth);
    let per_speaker_errors = errors
        .into_iter()
        .enumerate()
        .map(|(j, e)| (truth.name(j).to_owned(), e))
        .collect();
    Ok(EvaluationReport {
        mr,
        ari: ari_from_table(&table)?,
        acp: acp_from_table(&table),
        n_clusters: clustering.clusters.len(),
        assignment,
        per_speaker_errors,
    })
}
