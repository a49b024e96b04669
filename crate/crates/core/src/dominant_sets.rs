//! Dominant-set extraction by discrete replicator dynamics with peeling.
//!
//! Each peel starts the dynamics `x_i <- x_i (Ax)_i / (x^T A x)` at the
//! barycenter of the simplex over the still-unassigned nodes, stops when two
//! successive iterates are within `epsilon` in L2 norm, keeps the nodes whose
//! weight exceeds `theta * max(x)`, and removes them from the graph.
//!
//! The dynamics stall on equilibria that are not strict local maximizers of
//! `x^T A x` (for example the barycenter of perfectly symmetric data, or a
//! mixture of two maximum cliques that share nodes). After the step test
//! fires, the solver therefore inspects the curvature of `x^T A x` on the
//! face spanned by the current support. When a non-negative curvature
//! direction exists it takes an ascent step along it and resumes iterating.
//! Strict maximizers are left untouched.

use std::collections::BTreeMap;

use crate::affinity::AffinityMatrix;
use crate::clustering::{Cluster, ClusterSource, Clustering};
use crate::eigen::symmetric_eigen;

pub const DEFAULT_THETA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Relative weight above which a node takes part in the curvature check.
const CURVATURE_SUPPORT: f64 = 1e-3;
/// Relative payoff gap below which a node counts as an equilibrium member.
const EQUAL_PAYOFF_TOLERANCE: f64 = 1e-3;
/// Curvatures within this (relative) band of zero count as flat.
const CURVATURE_TOLERANCE: f64 = 1e-9;
/// Payoff loss tolerated from round-off when walking along a flat direction.
const FLAT_PAYOFF_SLACK: f64 = 1e-14;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("replicator dynamics need at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("subgraph is fully disconnected (zero payoff at the barycenter)")]
    Disconnected,
    #[error("non-finite value at iteration {iteration}")]
    NonFinite { iteration: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub theta: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            epsilon: DEFAULT_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl SolverConfig {
    pub fn new(theta: f64, epsilon: f64, max_iterations: usize) -> Result<Self, SolverError> {
        let config = Self {
            theta,
            epsilon,
            max_iterations,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(0.0..1.0).contains(&self.theta) {
            return Err(SolverError::InvalidConfig(format!(
                "theta must lie in [0, 1), got {}",
                self.theta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A point on the simplex reached by the replicator dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicVector {
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `x^T A x` at `weights`.
    pub payoff: f64,
}

fn mat_vec(a: &AffinityMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.n())
        .map(|i| a.row(i).iter().zip(x).map(|(aij, xj)| aij * xj).sum())
        .collect()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Runs the replicator dynamics from the barycenter.
pub fn replicator_dynamics(
    a: &AffinityMatrix,
    config: &SolverConfig,
) -> Result<CharacteristicVector, SolverError> {
    replicator_dynamics_observed(a, config, |_, _| {})
}

/// Same as [`replicator_dynamics`], calling `observer(x, x^T A x)` on the
/// starting point and after every update.
pub fn replicator_dynamics_observed<F>(
    a: &AffinityMatrix,
    config: &SolverConfig,
    mut observer: F,
) -> Result<CharacteristicVector, SolverError>
where
    F: FnMut(&[f64], f64),
{
    config.validate()?;
    let k = a.n();
    if k < 2 {
        return Err(SolverError::TooSmall(k));
    }

    let mut x = vec![1.0 / k as f64; k];
    let mut ax = mat_vec(a, &x);
    let mut payoff = dot(&x, &ax);
    if !payoff.is_finite() {
        return Err(SolverError::NonFinite { iteration: 0 });
    }
    if payoff <= 0.0 {
        return Err(SolverError::Disconnected);
    }
    observer(&x, payoff);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        let mut next: Vec<f64> = x.iter().zip(&ax).map(|(xi, axi)| xi * axi).collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let step = next
            .iter()
            .zip(&x)
            .map(|(n, o)| (n - o) * (n - o))
            .sum::<f64>()
            .sqrt();
        iterations += 1;
        x = next;
        ax = mat_vec(a, &x);
        payoff = dot(&x, &ax);
        if !payoff.is_finite() || !step.is_finite() {
            return Err(SolverError::NonFinite {
                iteration: iterations,
            });
        }
        observer(&x, payoff);

        if step > config.epsilon {
            continue;
        }
        converged = true;
        if iterations == config.max_iterations {
            break;
        }
        match escape_non_strict(a, &x, &ax, payoff) {
            Some(moved) => {
                iterations += 1;
                x = moved;
                ax = mat_vec(a, &x);
                payoff = dot(&x, &ax);
                observer(&x, payoff);
                converged = false;
            }
            None => break,
        }
    }

    Ok(CharacteristicVector {
        weights: x,
        iterations,
        converged,
        payoff,
    })
}

/// Ascent move off a non-strict equilibrium, or `None` when the curvature
/// of `x^T A x` is negative on the face of the current support.
///
/// The tangent space `{v : sum v = 0}` of the face is parametrized with a
/// Helmert basis, the projected Hessian is diagonalized, and the top
/// eigenvector is followed. A positive-curvature direction is taken with
/// non-negative slope for half the step to the face boundary. A flat one is
/// walked all the way (shorter side first), which zeroes one weight.
fn escape_non_strict(a: &AffinityMatrix, x: &[f64], ax: &[f64], payoff: f64) -> Option<Vec<f64>> {
    let x_max = x.iter().copied().fold(0.0, f64::max);
    // Nodes with comparable weight, plus positive-weight nodes whose payoff
    // matches the mean (they decay only algebraically and stall the step
    // test long before extinction).
    let support: Vec<usize> = (0..x.len())
        .filter(|&i| {
            x[i] > CURVATURE_SUPPORT * x_max
                || (x[i] > 0.0 && ax[i] >= payoff * (1.0 - EQUAL_PAYOFF_TOLERANCE))
        })
        .collect();
    let s = support.len();
    if s < 2 {
        return None;
    }
    let sub = a.submatrix(&support);
    let a_max = sub.values().iter().copied().fold(0.0, f64::max);
    if a_max == 0.0 {
        return None;
    }

    let hessian = helmert_projection(&sub);
    let eig = symmetric_eigen(&hessian, s - 1).ok()?;
    let curvature = *eig.values.last()?;
    let tolerance = CURVATURE_TOLERANCE * a_max;
    if curvature < -tolerance {
        return None;
    }
    let direction = helmert_lift(&eig.vector(s - 2));
    let flat = curvature <= tolerance;

    let slope: f64 = direction
        .iter()
        .zip(&support)
        .map(|(v, &i)| v * ax[i])
        .sum();
    // Distance to the face boundary along `sign * direction`.
    let reach = |sign: f64| {
        direction
            .iter()
            .zip(&support)
            .enumerate()
            .filter(|(_, (v, _))| sign * **v < 0.0)
            .map(|(p, (v, &i))| (p, x[i] / -(sign * v)))
            .min_by(|l, r| l.1.total_cmp(&r.1))
    };
    let signs = if flat {
        // Along a flat direction the payoff barely moves either way; prefer
        // the shorter walk and fall back to the other side.
        let forward = reach(1.0).map_or(f64::INFINITY, |r| r.1);
        let backward = reach(-1.0).map_or(f64::INFINITY, |r| r.1);
        if forward <= backward {
            [1.0, -1.0]
        } else {
            [-1.0, 1.0]
        }
    } else if slope >= 0.0 {
        [1.0, 1.0]
    } else {
        [-1.0, -1.0]
    };

    for sign in signs {
        let (blocking, limit) = reach(sign)?;
        let eta = if flat { limit } else { 0.5 * limit };
        let mut moved = x.to_vec();
        for (p, (&v, &i)) in direction.iter().zip(&support).enumerate() {
            moved[i] = if flat && p == blocking {
                0.0
            } else {
                (x[i] + eta * sign * v).max(0.0)
            };
        }
        let total: f64 = moved.iter().sum();
        moved.iter_mut().for_each(|v| *v /= total);

        let new_payoff = dot(&moved, &mat_vec(a, &moved));
        let accepted = if flat {
            new_payoff >= payoff - FLAT_PAYOFF_SLACK
        } else {
            new_payoff > payoff
        };
        if accepted {
            return Some(moved);
        }
    }
    None
}

/// `U^T A U` where the columns of `U` are the Helmert basis of the
/// sum-zero subspace of `R^s`.
fn helmert_projection(a: &AffinityMatrix) -> Vec<f64> {
    let s = a.n();
    let m = s - 1;
    // b = A U, shape s x m.
    let mut b = vec![0.0; s * m];
    for r in 0..s {
        let row = a.row(r);
        let mut prefix = 0.0;
        for k in 1..s {
            prefix += row[k - 1];
            let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
            b[r * m + (k - 1)] = (prefix - k as f64 * row[k]) * scale;
        }
    }
    // h = U^T b, shape m x m.
    let mut h = vec![0.0; m * m];
    for l in 0..m {
        let mut prefix = 0.0;
        for k in 1..s {
            prefix += b[(k - 1) * m + l];
            let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
            h[(k - 1) * m + l] = (prefix - k as f64 * b[k * m + l]) * scale;
        }
    }
    // Symmetrize round-off.
    for i in 0..m {
        for j in (i + 1)..m {
            let avg = 0.5 * (h[i * m + j] + h[j * m + i]);
            h[i * m + j] = avg;
            h[j * m + i] = avg;
        }
    }
    h
}

/// Maps Helmert coordinates back to a sum-zero vector of length `len + 1`.
fn helmert_lift(coords: &[f64]) -> Vec<f64> {
    let s = coords.len() + 1;
    let mut v = vec![0.0; s];
    for (idx, &c) in coords.iter().enumerate() {
        let k = idx + 1;
        let scale = c / ((k * (k + 1)) as f64).sqrt();
        for item in v.iter_mut().take(k) {
            *item += scale;
        }
        v[k] -= k as f64 * scale;
    }
    v
}

/// Indices whose weight is strictly greater than `theta * max(weights)`.
pub fn extract_support(weights: &[f64], theta: f64) -> Vec<usize> {
    let cutoff = theta * weights.iter().copied().fold(0.0, f64::max);
    (0..weights.len())
        .filter(|&i| weights[i] > cutoff)
        .collect()
}

/// Peels dominant sets until every node is assigned.
///
/// A lone remaining node becomes a singleton. If the remaining subgraph has
/// no edges, every remaining node becomes its own singleton in index order.
/// Clusters whose dynamics hit `max_iterations` are kept with
/// `converged = false`.
pub fn peel_clusters(a: &AffinityMatrix, config: &SolverConfig) -> Result<Clustering, SolverError> {
    config.validate()?;
    let mut active: Vec<usize> = (0..a.n()).collect();
    let mut clusters: Vec<Cluster> = Vec::new();

    let singleton = |rank: usize, item: usize| Cluster {
        rank,
        members: vec![item],
        weights: vec![1.0],
        converged: true,
        iterations: 0,
    };

    while !active.is_empty() {
        if active.len() == 1 {
            clusters.push(singleton(clusters.len(), active[0]));
            break;
        }
        let sub = a.submatrix(&active);
        let cv = match replicator_dynamics(&sub, config) {
            Ok(cv) => cv,
            Err(SolverError::Disconnected) => {
                for &item in &active {
                    clusters.push(singleton(clusters.len(), item));
                }
                break;
            }
            Err(e) => return Err(e),
        };

        let support = extract_support(&cv.weights, config.theta);
        let mass: f64 = support.iter().map(|&p| cv.weights[p]).sum();
        let mut picked: Vec<(usize, f64)> = support
            .iter()
            .map(|&p| (active[p], cv.weights[p] / mass))
            .collect();
        picked.sort_by(|l, r| r.1.total_cmp(&l.1).then(l.0.cmp(&r.0)));
        clusters.push(Cluster {
            rank: clusters.len(),
            members: picked.iter().map(|p| p.0).collect(),
            weights: picked.iter().map(|p| p.1).collect(),
            converged: cv.converged,
            iterations: cv.iterations,
        });

        let mut keep = vec![true; active.len()];
        for &p in &support {
            keep[p] = false;
        }
        let mut position = 0;
        active.retain(|_| {
            let k = keep[position];
            position += 1;
            k
        });
    }

    Ok(Clustering {
        clusters,
        n_items: a.n(),
        source: ClusterSource::Ds,
        params: BTreeMap::from([
            ("theta".to_owned(), config.theta),
            ("epsilon".to_owned(), config.epsilon),
            ("max_iterations".to_owned(), config.max_iterations as f64),
        ]),
    })
}
