//! Dominant-set clustering of embedding vectors.
//!
//! The pipeline turns an [`EmbeddingSet`] into a locally scaled cosine
//! [`AffinityMatrix`], peels dominant sets off it with replicator dynamics,
//! maps the resulting clusters onto ground-truth labels, and scores them with
//! the misclassification rate, adjusted Rand index and average cluster
//! purity. Spherical k-means and an eigengap cluster-count estimate serve as
//! baselines, and [`sweep`] evaluates the pipeline over a parameter grid.
//!
//! ```
//! use scds::{build_affinity, evaluate, peel_clusters, synth_embeddings};
//! use scds::{LabelingMethod, SolverConfig, SynthConfig};
//!
//! let set = synth_embeddings(&SynthConfig::new(3, 2, 8, 0.05, 1)).unwrap();
//! let affinity = build_affinity(&set, 7).unwrap();
//! let clustering = peel_clusters(&affinity, &SolverConfig::default()).unwrap();
//! let report = evaluate(&clustering, &set.truth().unwrap(), LabelingMethod::Max).unwrap();
//! assert_eq!(report.mr, 0.0);
//! ```

pub mod affinity;
pub mod baselines;
pub mod clustering;
pub mod dominant_sets;
pub mod eigen;
pub mod embeddings;
pub mod hungarian;
pub mod labeling;
pub mod metrics;
pub mod sweep;

pub use affinity::{build_affinity, cosine_distance, local_scales, AffinityError, AffinityMatrix};
pub use baselines::{eigengap_estimate, kmeans_cosine, BaselineError, KMeansConfig};
pub use clustering::{Cluster, ClusterSource, Clustering, ClusteringError};
pub use dominant_sets::{
    extract_support, peel_clusters, replicator_dynamics, CharacteristicVector, SolverConfig,
    SolverError,
};
pub use embeddings::{
    load_embeddings, save_embeddings, synth_embeddings, EmbeddingError, EmbeddingFormat,
    EmbeddingSet, GroundTruth, Item, SynthConfig,
};
pub use labeling::{label_hungarian, label_max, LabelAssignment, LabelingError, LabelingMethod};
pub use metrics::{
    adjusted_rand_index, average_cluster_purity, evaluate, misclassification_rate,
    EvaluationReport, MetricsError,
};
pub use sweep::{run_sweep, SweepAxes, SweepError, SweepGrid, SweepRow};
