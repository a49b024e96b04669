//! Sensitivity sweep of the dominant-set pipeline over a (theta, epsilon)
//! grid.

use std::io::Write;

use rayon::prelude::*;

use crate::affinity::{build_affinity, AffinityError, AffinityMatrix};
use crate::dominant_sets::{peel_clusters, SolverConfig, SolverError};
use crate::embeddings::{EmbeddingSet, GroundTruth};
use crate::labeling::LabelingMethod;
use crate::metrics::{evaluate, MetricsError};

/// Default theta axis: 0 to 0.9995, denser near zero.
pub const DEFAULT_THETAS: [f64; 17] = [
    0.0, 0.0005, 0.001, 0.0025, 0.005, 0.01, 0.025, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.67, 0.8, 0.9,
    0.9995,
];

/// Default epsilon axis: decades from 1e-11 to 1e-2.
pub const DEFAULT_EPSILONS: [f64; 10] =
    [1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SweepError {
    #[error("sweep input must be labeled")]
    Unlabeled,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Affinity(#[from] AffinityError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub thetas: Vec<f64>,
    pub epsilons: Vec<f64>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        Self {
            thetas: DEFAULT_THETAS.to_vec(),
            epsilons: DEFAULT_EPSILONS.to_vec(),
        }
    }
}

impl SweepAxes {
    pub fn new(thetas: Vec<f64>, epsilons: Vec<f64>) -> Result<Self, SweepError> {
        let axes = Self { thetas, epsilons };
        axes.validate()?;
        Ok(axes)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let increasing = |v: &[f64]| !v.is_empty() && v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.thetas) || !increasing(&self.epsilons) {
            return Err(SweepError::InvalidGrid(
                "axes must be non-empty and strictly increasing".into(),
            ));
        }
        if self.thetas.iter().any(|t| !(0.0..1.0).contains(t)) {
            return Err(SweepError::InvalidGrid(
                "theta values must lie in [0, 1)".into(),
            ));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(SweepError::InvalidGrid(
                "epsilon values must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub epsilon: f64,
    pub mr: f64,
    pub ari: f64,
    pub acp: f64,
    pub n_clusters: usize,
}

impl SweepRow {
    /// Whether two rows report the same metrics (grid position ignored).
    pub fn same_metrics(&self, other: &SweepRow) -> bool {
        (self.mr, self.ari, self.acp, self.n_clusters)
            == (other.mr, other.ari, other.acp, other.n_clusters)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axes: SweepAxes,
    /// Row-major: theta outer, epsilon inner.
    pub rows: Vec<SweepRow>,
}

impl SweepGrid {
    pub const CSV_HEADER: &'static str = "theta,epsilon,mr,ari,acp,n_clusters";

    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                sink,
                "{},{},{},{},{},{}",
                r.theta, r.epsilon, r.mr, r.ari, r.acp, r.n_clusters
            )?;
        }
        Ok(())
    }
}

/// Builds the affinity once and evaluates every grid cell.
pub fn run_sweep(
    set: &EmbeddingSet,
    axes: &SweepAxes,
    knn: usize,
    labeling: LabelingMethod,
    max_iterations: usize,
) -> Result<SweepGrid, SweepError> {
    let truth = set.truth().ok_or(SweepError::Unlabeled)?;
    axes.validate()?;
    let affinity = build_affinity(set, knn)?;
    sweep_affinity(&affinity, &truth, axes, labeling, max_iterations)
}

/// Evaluates every cell on a prebuilt affinity. Cells run in parallel and
/// are gathered in row-major order.
pub fn sweep_affinity(
    affinity: &AffinityMatrix,
    truth: &GroundTruth,
    axes: &SweepAxes,
    labeling: LabelingMethod,
    max_iterations: usize,
) -> Result<SweepGrid, SweepError> {
    axes.validate()?;
    let cells: Vec<(f64, f64)> = axes
        .thetas
        .iter()
        .flat_map(|&t| axes.epsilons.iter().map(move |&e| (t, e)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(theta, epsilon)| {
            let config = SolverConfig::new(theta, epsilon, max_iterations)?;
            let clustering = peel_clusters(affinity, &config)?;
            let report = evaluate(&clustering, truth, labeling)?;
            Ok(SweepRow {
                theta,
                epsilon,
                mr: report.mr,
                ari: report.ari,
                acp: report.acp,
                n_clusters: report.n_clusters,
            })
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(SweepGrid {
        axes: axes.clone(),
        rows,
    })
}
