//! One-to-one mapping of clusters onto ground-truth labels.

use std::fmt;
use std::str::FromStr;

use crate::clustering::{ClusterSource, Clustering};
use crate::embeddings::GroundTruth;
use crate::hungarian::min_cost_assignment;
use crate::metrics::ContingencyTable;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LabelingError {
    #[error("ground truth covers {truth} items but the clustering has {clustering}")]
    TruthMismatch { truth: usize, clustering: usize },
    #[error("max labeling needs characteristic-vector weights; {0} clusterings have none")]
    WeightsUnavailable(ClusterSource),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelingMethod {
    /// Label of the member with maximum participation; later duplicates lose.
    Max,
    /// Optimal one-to-one assignment on the contingency counts.
    #[default]
    Hungarian,
}

impl LabelingMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelingMethod::Max => "max",
            LabelingMethod::Hungarian => "hungarian",
        }
    }
}

impl fmt::Display for LabelingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelingMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(LabelingMethod::Max),
            "hungarian" => Ok(LabelingMethod::Hungarian),
            other => Err(format!("unknown labeling method `{other}`")),
        }
    }
}

/// Label index (into [`GroundTruth::label_names`]) per cluster position;
/// `None` marks an unassigned cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAssignment {
    pub method: LabelingMethod,
    pub mapping: Vec<Option<usize>>,
}

impl LabelAssignment {
    /// `{"method": ..., "mapping": {"0": "spk3", "1": null, ...}}`
    pub fn to_json(&self, truth: &GroundTruth) -> serde_json::Value {
        let mut mapping = serde_json::Map::new();
        for (rank, label) in self.mapping.iter().enumerate() {
            let value = match label {
                Some(l) => serde_json::Value::String(truth.name(*l).to_owned()),
                None => serde_json::Value::Null,
            };
            mapping.insert(rank.to_string(), value);
        }
        serde_json::json!({ "method": self.method.as_str(), "mapping": mapping })
    }
}

fn check_truth(clustering: &Clustering, truth: &GroundTruth) -> Result<(), LabelingError> {
    if truth.n_items() != clustering.n_items {
        return Err(LabelingError::TruthMismatch {
            truth: truth.n_items(),
            clustering: clustering.n_items,
        });
    }
    Ok(())
}

pub fn label_clusters(
    clustering: &Clustering,
    truth: &GroundTruth,
    method: LabelingMethod,
) -> Result<LabelAssignment, LabelingError> {
    match method {
        LabelingMethod::Max => label_max(clustering, truth),
        LabelingMethod::Hungarian => label_hungarian(clustering, truth),
    }
}

/// Prototype rule: in extraction order, each cluster takes the label of its
/// highest-weight member (ties toward the lower item index). A cluster whose
/// label was already taken stays unassigned.
pub fn label_max(
    clustering: &Clustering,
    truth: &GroundTruth,
) -> Result<LabelAssignment, LabelingError> {
    check_truth(clustering, truth)?;
    if !clustering.source.has_participation_weights() {
        return Err(LabelingError::WeightsUnavailable(clustering.source));
    }
    let mut taken = vec![false; truth.n_labels()];
    let mapping = clustering
        .clusters
        .iter()
        .map(|cluster| {
            let label = truth.label_of(cluster.prototype()?);
            (!std::mem::replace(&mut taken[label], true)).then_some(label)
        })
        .collect();
    Ok(LabelAssignment {
        method: LabelingMethod::Max,
        mapping,
    })
}

/// Maximum-agreement assignment via the Hungarian method on
/// `max(c) - c`, where `c[i][j]` counts items of label `j` in cluster `i`.
/// Non-square tables are padded with zero counts; clusters matched to a
/// padding column are unassigned.
pub fn label_hungarian(
    clustering: &Clustering,
    truth: &GroundTruth,
) -> Result<LabelAssignment, LabelingError> {
    check_truth(clustering, truth)?;
    let table = ContingencyTable::new(clustering, truth);
    Ok(LabelAssignment {
        method: LabelingMethod::Hungarian,
        mapping: assign_counts(&table),
    })
}

/// Hungarian assignment on a raw count table.
pub fn assign_counts(table: &ContingencyTable) -> Vec<Option<usize>> {
    let (rows, cols) = (table.rows(), table.cols());
    let n = rows.max(cols);
    let max_count = table.max_count() as i64;
    let mut cost = vec![max_count; n * n];
    for i in 0..rows {
        for j in 0..cols {
            cost[i * n + j] = max_count - table.get(i, j) as i64;
        }
    }
    let assignment = min_cost_assignment(&cost, n);
    assignment[..rows]
        .iter()
        .map(|&j| (j < cols).then_some(j))
        .collect()
}
