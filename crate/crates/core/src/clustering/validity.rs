//! Partition quality scoring and outlier-cluster trimming.

use super::{ClusterAssignment, DistanceMatrix};
use crate::data::{euclidean, PointSet};
use crate::error::{Error, Result};

/// Dunn index of a partition: the smallest single-linkage separation between
/// two clusters divided by the largest cluster diameter. Larger is better.
/// Outlier-flagged points are excluded from both terms.
pub fn dunn_index(points: &PointSet, assignment: &ClusterAssignment) -> Result<f64> {
    if assignment.len() != points.len() {
        return Err(Error::invalid(format!(
            "assignment covers {} points but the set has {}",
            assignment.len(),
            points.len()
        )));
    }
    let k = assignment.k();
    if k < 2 {
        return Err(Error::invalid("Dunn index needs at least 2 clusters"));
    }
    let clusters: Vec<Vec<usize>> = (0..k).map(|r| assignment.members(r)).collect();
    if let Some(r) = clusters.iter().position(|c| c.is_empty()) {
        return Err(Error::invalid(format!("cluster {r} has no surviving members")));
    }

    let mut max_diameter = 0.0f64;
    for members in &clusters {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let d = euclidean(points.point(i), points.point(j));
                if d > max_diameter {
                    max_diameter = d;
                }
            }
        }
    }
    if max_diameter == 0.0 {
        return Err(Error::degenerate(
            "all intra-cluster distances are zero; Dunn index undefined",
        ));
    }

    let mut min_separation = f64::INFINITY;
    for r in 0..k {
        for s in (r + 1)..k {
            for &i in &clusters[r] {
                for &j in &clusters[s] {
                    let d = euclidean(points.point(i), points.point(j));
                    if d < min_separation {
                        min_separation = d;
                    }
                }
            }
        }
    }

    Ok(min_separation / max_diameter)
}

/// Flags clusters holding fewer than `min_frac * n_total` points as outliers.
///
/// Surviving clusters are relabeled consecutively. Flagged points are
/// relabeled to their nearest surviving medoid so they remain usable by the
/// transform stage; the flag is kept for auditing. Counting uses strict
/// inequality, so a cluster of exactly `min_frac * n_total` points survives.
pub fn trim_small_clusters(
    assignment: &ClusterAssignment,
    n_total: usize,
    min_frac: f64,
    points: &PointSet,
) -> Result<ClusterAssignment> {
    if !(0.0..1.0).contains(&min_frac) {
        return Err(Error::invalid(format!(
            "min_frac must be in [0, 1) (got {min_frac})"
        )));
    }
    let threshold = min_frac * n_total as f64;
    let sizes = assignment.cluster_sizes();
    let survives: Vec<bool> = sizes.iter().map(|&s| (s as f64) >= threshold).collect();
    if survives.iter().all(|&s| !s) {
        return Err(Error::degenerate(
            "every cluster falls below the outlier threshold",
        ));
    }

    // Old cluster index -> new index among survivors.
    let mut remap = vec![usize::MAX; assignment.k()];
    let mut surviving_medoids = Vec::new();
    for (r, &keep) in survives.iter().enumerate() {
        if keep {
            remap[r] = surviving_medoids.len();
            surviving_medoids.push(assignment.medoids()[r]);
        }
    }

    let mut labels = Vec::with_capacity(assignment.len());
    let mut flags = Vec::with_capacity(assignment.len());
    for (i, &old_label) in assignment.labels().iter().enumerate() {
        let already_outlier = assignment.outlier_flags()[i];
        if !already_outlier && survives[old_label] {
            labels.push(remap[old_label]);
            flags.push(false);
        } else {
            // Outliers (old and new) go to the nearest surviving medoid.
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (new_r, &m) in surviving_medoids.iter().enumerate() {
                let d = euclidean(points.point(i), points.point(m));
                if d < best_d {
                    best_d = d;
                    best = new_r;
                }
            }
            labels.push(best);
            flags.push(true);
        }
    }

    Ok(ClusterAssignment::new(labels, surviving_medoids, flags))
}

/// Within-cluster dispersion of a partition: for each cluster, the summed
/// squared distances to the cluster mean of its non-outlier members.
pub(crate) fn within_dispersion(points: &PointSet, assignment: &ClusterAssignment) -> f64 {
    let mut total = 0.0;
    for r in 0..assignment.k() {
        let members = assignment.members(r);
        if members.is_empty() {
            continue;
        }
        let d = points.dim();
        let mut mean = vec![0.0; d];
        for &i in &members {
            for (m, v) in mean.iter_mut().zip(points.point(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= members.len() as f64;
        }
        for &i in &members {
            total += points
                .point(i)
                .iter()
                .zip(&mean)
                .map(|(x, m)| (x - m) * (x - m))
                .sum::<f64>();
        }
    }
    total
}

#[allow(dead_code)]
pub(crate) fn distance_matrix(points: &PointSet) -> DistanceMatrix {
    DistanceMatrix::build(points)
}
