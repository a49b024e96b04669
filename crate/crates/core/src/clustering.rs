//! Hard partitions of item indices and their JSON / CSV file formats.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingSet;

/// Which algorithm produced a clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterSource {
    /// Dominant sets; member weights are characteristic-vector values.
    Ds,
    /// Spherical k-means; member weights are uniform.
    Kmeans,
    /// Assignment read from an external `id,cluster_id` file.
    External,
}

impl ClusterSource {
    /// Whether member weights carry characteristic-vector participation.
    pub fn has_participation_weights(self) -> bool {
        matches!(self, ClusterSource::Ds)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClusterSource::Ds => "ds",
            ClusterSource::Kmeans => "kmeans",
            ClusterSource::External => "external",
        }
    }
}

impl std::fmt::Display for ClusterSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One extracted cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub rank: usize,
    /// Original item indices.
    pub members: Vec<usize>,
    /// Weights aligned with `members`, summing to 1.
    pub weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member with maximum weight, ties toward the lower item index.
    pub fn prototype(&self) -> Option<usize> {
        self.members
            .iter()
            .zip(&self.weights)
            .max_by(|(ia, wa), (ib, wb)| wa.total_cmp(wb).then(ib.cmp(ia)))
            .map(|(&i, _)| i)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClusteringError {
    #[error("cluster {rank} is empty")]
    EmptyCluster { rank: usize },
    #[error("cluster at position {position} has rank {rank}")]
    RankMismatch { position: usize, rank: usize },
    #[error("item {item} is out of range for {n_items} items")]
    OutOfRange { item: usize, n_items: usize },
    #[error("item {item} appears in more than one cluster")]
    Overlap { item: usize },
    #[error("item {item} is not assigned to any cluster")]
    Unassigned { item: usize },
    #[error("cluster {rank} has {members} members but {weights} weights")]
    WeightCount {
        rank: usize,
        members: usize,
        weights: usize,
    },
    #[error("id `{0}` appears in the clustering but not in the embeddings")]
    UnknownId(String),
    #[error("id `{0}` appears in the embeddings but not in the clustering")]
    MissingId(String),
    #[error("id `{0}` is listed more than once")]
    DuplicateId(String),
    #[error("malformed clustering file: {0}")]
    Format(String),
}

/// Ordered partition of `0..n_items`.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub n_items: usize,
    pub source: ClusterSource,
    pub params: BTreeMap<String, f64>,
}

impl Clustering {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster position for every item.
    pub fn assignments(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.n_items];
        for (c, cluster) in self.clusters.iter().enumerate() {
            for &m in &cluster.members {
                out[m] = c;
            }
        }
        out
    }

    /// Groups items by cluster id; clusters ranked by descending size, then
    /// by their smallest member. Weights are uniform.
    pub fn from_assignments(assignments: &[usize], source: ClusterSource) -> Self {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (item, &c) in assignments.iter().enumerate() {
            groups.entry(c).or_default().push(item);
        }
        let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
        groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let clusters = groups
            .into_iter()
            .enumerate()
            .map(|(rank, members)| {
                let w = 1.0 / members.len() as f64;
                Cluster {
                    rank,
                    weights: vec![w; members.len()],
                    members,
                    converged: true,
                    iterations: 0,
                }
            })
            .collect();
        Self {
            clusters,
            n_items: assignments.len(),
            source,
            params: BTreeMap::new(),
        }
    }

    /// Checks disjointness, coverage, non-emptiness and rank order.
    pub fn validate(&self) -> Result<(), ClusteringError> {
        let mut seen = vec![false; self.n_items];
        for (position, cluster) in self.clusters.iter().enumerate() {
            if cluster.rank != position {
                return Err(ClusteringError::RankMismatch {
                    position,
                    rank: cluster.rank,
                });
            }
            if cluster.members.is_empty() {
                return Err(ClusteringError::EmptyCluster { rank: cluster.rank });
            }
            if cluster.weights.len() != cluster.members.len() {
                return Err(ClusteringError::WeightCount {
                    rank: cluster.rank,
                    members: cluster.members.len(),
                    weights: cluster.weights.len(),
                });
            }
            for &item in &cluster.members {
                if item >= self.n_items {
                    return Err(ClusteringError::OutOfRange {
                        item,
                        n_items: self.n_items,
                    });
                }
                if std::mem::replace(&mut seen[item], true) {
                    return Err(ClusteringError::Overlap { item });
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            Some(item) => Err(ClusteringError::Unassigned { item }),
            None => Ok(()),
        }
    }

    /// Serializes with item ids. Members are listed by descending weight,
    /// ties by id.
    pub fn to_json(&self, set: &EmbeddingSet) -> serde_json::Value {
        let clusters: Vec<ClusterDoc> = self
            .clusters
            .iter()
            .map(|cluster| {
                let mut pairs: Vec<(&str, f64)> = cluster
                    .members
                    .iter()
                    .zip(&cluster.weights)
                    .map(|(&m, &w)| (set.id(m), w))
                    .collect();
                pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
                let mut weights = serde_json::Map::new();
                for (id, w) in &pairs {
                    weights.insert((*id).to_owned(), serde_json::json!(w));
                }
                ClusterDoc {
                    rank: cluster.rank,
                    members: pairs.iter().map(|(id, _)| (*id).to_owned()).collect(),
                    weights,
                    converged: cluster.converged,
                    iterations: cluster.iterations,
                }
            })
            .collect();
        serde_json::to_value(ClusteringDoc {
            algorithm: self.source,
            params: self.params.clone(),
            clusters,
        })
        .expect("clustering document is always representable")
    }

    pub fn write_json<W: Write>(&self, set: &EmbeddingSet, sink: W) -> std::io::Result<()> {
        let mut sink = sink;
        serde_json::to_writer_pretty(&mut sink, &self.to_json(set))?;
        writeln!(sink)
    }

    /// Parses a clustering JSON file and resolves ids against `set`.
    pub fn read_json<R: Read>(source: R, set: &EmbeddingSet) -> Result<Self, ClusteringError> {
        let doc: ClusteringDoc =
            serde_json::from_reader(source).map_err(|e| ClusteringError::Format(e.to_string()))?;
        let index = id_index(set);
        let mut assigned = vec![false; set.len()];
        let mut clusters = Vec::with_capacity(doc.clusters.len());
        for (position, c) in doc.clusters.into_iter().enumerate() {
            let mut members = Vec::with_capacity(c.members.len());
            let mut weights = Vec::with_capacity(c.members.len());
            for id in &c.members {
                let &i = index
                    .get(id.as_str())
                    .ok_or_else(|| ClusteringError::UnknownId(id.clone()))?;
                if std::mem::replace(&mut assigned[i], true) {
                    return Err(ClusteringError::DuplicateId(id.clone()));
                }
                let w = match c.weights.get(id) {
                    Some(v) => v.as_f64().ok_or_else(|| {
                        ClusteringError::Format(format!("weight of `{id}` is not a number"))
                    })?,
                    None => 1.0 / c.members.len() as f64,
                };
                members.push(i);
                weights.push(w);
            }
            clusters.push(Cluster {
                rank: position,
                members,
                weights,
                converged: c.converged,
                iterations: c.iterations,
            });
        }
        if let Some(i) = assigned.iter().position(|&a| !a) {
            return Err(ClusteringError::MissingId(set.id(i).to_owned()));
        }
        let clustering = Self {
            clusters,
            n_items: set.len(),
            source: doc.algorithm,
            params: doc.params,
        };
        clustering.validate()?;
        Ok(clustering)
    }

    /// Reads an external `id,cluster_id` assignment file.
    pub fn read_external_csv<R: Read>(
        source: R,
        set: &EmbeddingSet,
    ) -> Result<Self, ClusteringError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(source);
        let header = reader
            .headers()
            .map_err(|e| ClusteringError::Format(e.to_string()))?
            .clone();
        if header.len() != 2 || &header[0] != "id" || &header[1] != "cluster_id" {
            return Err(ClusteringError::Format(
                "expected header `id,cluster_id`".into(),
            ));
        }
        let index = id_index(set);
        let mut cluster_ids: HashMap<String, usize> = HashMap::new();
        let mut assignment = vec![usize::MAX; set.len()];
        for record in reader.records() {
            let record = record.map_err(|e| ClusteringError::Format(e.to_string()))?;
            let id = &record[0];
            let &i = index
                .get(id)
                .ok_or_else(|| ClusteringError::UnknownId(id.to_owned()))?;
            if assignment[i] != usize::MAX {
                return Err(ClusteringError::DuplicateId(id.to_owned()));
            }
            let next = cluster_ids.len();
            assignment[i] = *cluster_ids.entry(record[1].to_owned()).or_insert(next);
        }
        if let Some(i) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(ClusteringError::MissingId(set.id(i).to_owned()));
        }
        Ok(Self::from_assignments(&assignment, ClusterSource::External))
    }
}

fn id_index(set: &EmbeddingSet) -> HashMap<&str, usize> {
    set.ids().enumerate().map(|(i, id)| (id, i)).collect()
}

#[derive(Serialize, Deserialize)]
struct ClusteringDoc {
    algorithm: ClusterSource,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    clusters: Vec<ClusterDoc>,
}

#[derive(Serialize, Deserialize)]
struct ClusterDoc {
    rank: usize,
    members: Vec<String>,
    #[serde(default)]
    weights: serde_json::Map<String, serde_json::Value>,
    #[serde(default = "default_true")]
    converged: bool,
    #[serde(default)]
    iterations: usize,
}

fn default_true() -> bool {
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{load_embeddings, EmbeddingFormat};

    fn four() -> EmbeddingSet {
        load_embeddings(
            "id,label,f0,f1\na1,A,1,0\na2,A,1,0.1\nb1,B,0,1\nb2,B,0.1,1\n".as_bytes(),
            EmbeddingFormat::Csv,
        )
        .unwrap()
    }

    #[test]
    fn validate_catches_overlap_and_gaps() {
        let mut c = Clustering::from_assignments(&[0, 0, 1, 1], ClusterSource::External);
        assert_eq!(c.validate(), Ok(()));
        c.clusters[1].members[0] = 0;
        assert_eq!(c.validate(), Err(ClusteringError::Overlap { item: 0 }));
        c.clusters[1].members = vec![3];
        c.clusters[1].weights = vec![1.0];
        assert_eq!(c.validate(), Err(ClusteringError::Unassigned { item: 2 }));
    }

    #[test]
    fn from_assignments_ranks_by_size() {
        let c = Clustering::from_assignments(&[5, 2, 2, 9, 2], ClusterSource::External);
        let members: Vec<_> = c.clusters.iter().map(|k| k.members.clone()).collect();
        assert_eq!(members, vec![vec![1, 2, 4], vec![0], vec![3]]);
    }

    #[test]
    fn json_orders_members_by_weight_then_id() {
        let set = four();
        let c = Clustering {
            clusters: vec![
                Cluster {
                    rank: 0,
                    members: vec![0, 1],
                    weights: vec![0.25, 0.75],
                    converged: true,
                    iterations: 3,
                },
                Cluster {
                    rank: 1,
                    members: vec![3, 2],
                    weights: vec![0.5, 0.5],
                    converged: false,
                    iterations: 9,
                },
            ],
            n_items: 4,
            source: ClusterSource::Ds,
            params: BTreeMap::from([("theta".to_owned(), 0.1)]),
        };
        let json = c.to_json(&set);
        assert_eq!(
            json["clusters"][0]["members"],
            serde_json::json!(["a2", "a1"])
        );
        assert_eq!(
            json["clusters"][1]["members"],
            serde_json::json!(["b1", "b2"])
        );
        assert_eq!(json["algorithm"], "ds");

        let mut bytes = Vec::new();
        c.write_json(&set, &mut bytes).unwrap();
        let back = Clustering::read_json(bytes.as_slice(), &set).unwrap();
        assert_eq!(back.assignments(), c.assignments());
        assert_eq!(back.clusters[0].prototype(), Some(1));
        assert!(!back.clusters[1].converged);
    }

    #[test]
    fn json_rejects_orphans() {
        let set = four();
        let doc = r#"{"algorithm":"ds","clusters":[{"rank":0,"members":["a1","a2","b1","zz"]}]}"#;
        assert_eq!(
            Clustering::read_json(doc.as_bytes(), &set),
            Err(ClusteringError::UnknownId("zz".into()))
        );
        let doc = r#"{"algorithm":"ds","clusters":[{"rank":0,"members":["a1","a2","b1"]}]}"#;
        assert_eq!(
            Clustering::read_json(doc.as_bytes(), &set),
            Err(ClusteringError::MissingId("b2".into()))
        );
    }

    #[test]
    fn external_csv() {
        let set = four();
        let c = Clustering::read_external_csv(
            "id,cluster_id\na1,x\nb1,y\na2,x\nb2,y\n".as_bytes(),
            &set,
        )
        .unwrap();
        assert_eq!(c.source, ClusterSource::External);
        assert_eq!(c.assignments(), vec![0, 0, 1, 1]);
        assert_eq!(
            Clustering::read_external_csv("id,cluster_id\na1,x\n".as_bytes(), &set),
            Err(ClusteringError::MissingId("a2".into()))
        );
    }
}
