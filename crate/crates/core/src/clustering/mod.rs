//! Cluster detection: PAM partitioning, Dunn-index scoring, the gap statistic
//! for the one-versus-two-cluster decision, outlier trimming, and the
//! per-group selection of the number of sub-populations.

mod gap;
mod pam;
mod select;
mod validity;

pub use gap::{gap_statistic, GapDecision};
pub use pam::pam;
pub use select::{select_k0, select_k_single, KSelection, SingleKSelection};
pub use validity::{dunn_index, trim_small_clusters};

use crate::data::{euclidean, PointSet};
use crate::error::{Error, Result};

/// Fraction below which a cluster is treated as an outlier group.
pub const DEFAULT_MIN_CLUSTER_FRAC: f64 = 0.02;

/// A hard partition of a point set.
///
/// `labels` holds a 0-based cluster index per point. `medoids` holds one
/// representative point index per cluster, ordered by cluster index. Points
/// flagged as outliers keep a usable label (their nearest surviving medoid)
/// so that downstream transforms never drop observations, but validity
/// indices ignore them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    medoids: Vec<usize>,
    outlier_flags: Vec<bool>,
    k: usize,
}

impl ClusterAssignment {
    pub(crate) fn new(labels: Vec<usize>, medoids: Vec<usize>, outlier_flags: Vec<bool>) -> Self {
        let k = medoids.len();
        debug_assert_eq!(labels.len(), outlier_flags.len());
        debug_assert!(labels.iter().all(|&l| l < k));
        debug_assert!(medoids.iter().all(|&m| m < labels.len()));
        ClusterAssignment {
            labels,
            medoids,
            outlier_flags,
            k,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn medoids(&self) -> &[usize] {
        &self.medoids
    }

    pub fn outlier_flags(&self) -> &[bool] {
        &self.outlier_flags
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Point indices of cluster `r`, excluding outlier-flagged points.
    pub fn members(&self, r: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(i, &l)| l == r && !self.outlier_flags[i])
            .map(|(i, _)| i)
            .collect()
    }

    /// Non-outlier member count per cluster.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            if !self.outlier_flags[i] {
                sizes[l] += 1;
            }
        }
        sizes
    }

    /// Total point-to-medoid distance over non-outlier points.
    pub fn cost(&self, points: &PointSet) -> f64 {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(i, _)| !self.outlier_flags[i])
            .map(|(i, &l)| euclidean(points.point(i), points.point(self.medoids[l])))
            .sum()
    }
}

/// Dense symmetric matrix of pairwise Euclidean distances.
pub(crate) struct DistanceMatrix {
    d: Vec<f64>,
    n: usize,
}

impl DistanceMatrix {
    pub(crate) fn build(points: &PointSet) -> Self {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dist = euclidean(points.point(i), points.point(j));
                d[i * n + j] = dist;
                d[j * n + i] = dist;
            }
        }
        DistanceMatrix { d, n }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }
}

pub(crate) fn validate_nonempty(points: &PointSet) -> Result<()> {
    if points.is_empty() {
        Err(Error::invalid("point set is empty"))
    } else {
        Ok(())
    }
}
