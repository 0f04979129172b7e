//! Selection of the number of sub-populations, per group and jointly.

use std::collections::BTreeMap;

use serde::Serialize;

use super::gap::{gap_statistic, GapDecision};
use super::pam::pam;
use super::validity::trim_small_clusters;
use super::{ClusterAssignment, DEFAULT_MIN_CLUSTER_FRAC};
use crate::data::{euclidean, PointSet};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Cluster-count choice for one group, with the scores that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct SingleKSelection {
    /// The selected number of clusters.
    pub k: usize,
    /// Selection score per candidate k (candidates whose partitions could
    /// not be scored are absent).
    pub dunn_scores: BTreeMap<usize, f64>,
    /// Present when the gap statistic arbitrated between 1 and 2.
    pub gap: Option<GapDecision>,
}

/// Joint cluster-count choice for the two groups.
#[derive(Debug, Clone, Serialize)]
pub struct KSelection {
    pub group1: SingleKSelection,
    pub group2: SingleKSelection,
    /// min(k1, k2).
    pub k0: usize,
}

impl KSelection {
    pub fn k1(&self) -> usize {
        self.group1.k
    }

    pub fn k2(&self) -> usize {
        self.group2.k
    }
}

/// Dunn-type score used to rank candidate partitions: smallest centroid
/// separation over twice the largest mean distance to centroid.
///
/// The classical single-linkage/max-diameter Dunn ratio is dominated by
/// micro-clusters on noisy data (a pair of near-duplicate points has a tiny
/// diameter and acts as a separator), which drives the selected k to the top
/// of the scan range on unstructured samples. The centroid/average-spread
/// form ranks genuine separations the same way while staying flat on
/// unimodal data. Returns None when fewer than two non-empty clusters exist
/// or all points coincide.
fn selection_score(points: &PointSet, assignment: &ClusterAssignment) -> Option<f64> {
    let k = assignment.k();
    if k < 2 {
        return None;
    }
    let d = points.dim();
    let members: Vec<Vec<usize>> = (0..k).map(|r| assignment.members(r)).collect();
    if members.iter().any(|m| m.is_empty()) {
        return None;
    }
    let centroids: Vec<Vec<f64>> = members
        .iter()
        .map(|m| {
            let mut c = vec![0.0; d];
            for &i in m {
                for (cj, xj) in c.iter_mut().zip(points.point(i)) {
                    *cj += xj;
                }
            }
            for v in &mut c {
                *v /= m.len() as f64;
            }
            c
        })
        .collect();

    let mut min_sep = f64::INFINITY;
    for r in 0..k {
        for s in (r + 1)..k {
            min_sep = min_sep.min(euclidean(&centroids[r], &centroids[s]));
        }
    }
    let mut max_spread = 0.0f64;
    for (m, c) in members.iter().zip(&centroids) {
        let total: f64 = m.iter().map(|&i| euclidean(points.point(i), c)).sum();
        max_spread = max_spread.max(2.0 * total / m.len() as f64);
    }
    if max_spread <= 0.0 {
        return None;
    }
    Some(min_sep / max_spread)
}

/// Selects the number of clusters in one group.
///
/// Runs PAM for k = 2..=k_max, trims outlier micro-clusters, scores the
/// surviving partition and keeps the k with the highest score (ties favor
/// the smallest k). Candidates with a surviving cluster of fewer than d + 1
/// points are skipped: such a cluster cannot support the moment estimates
/// the later stages need. When the winner is k = 2 — the score cannot speak
/// for k = 1 — the gap statistic arbitrates between one and two clusters.
pub fn select_k_single(
    points: &PointSet,
    k_max: usize,
    gap_b: usize,
    seed: u64,
) -> Result<SingleKSelection> {
    if k_max < 2 {
        return Err(Error::invalid(format!("k_max must be at least 2 (got {k_max})")));
    }
    if points.len() <= k_max {
        return Err(Error::invalid(format!(
            "need more than k_max = {k_max} points (got {})",
            points.len()
        )));
    }

    let n = points.len();
    let min_usable = points.dim() + 1;
    let mut dunn_scores = BTreeMap::new();
    for k in 2..=k_max {
        let assignment = pam(points, k, derive_seed(seed, k as u64))?;
        let trimmed = trim_small_clusters(&assignment, n, DEFAULT_MIN_CLUSTER_FRAC, points)?;
        if trimmed.k() < 2 {
            continue;
        }
        if trimmed.cluster_sizes().iter().any(|&s| s < min_usable) {
            continue;
        }
        if let Some(score) = selection_score(points, &trimmed) {
            dunn_scores.insert(k, score);
        }
    }

    // BTreeMap iteration is ascending in k, so strict comparison keeps the
    // smallest k among ties.
    let mut best_k = None;
    let mut best_score = f64::NEG_INFINITY;
    for (&k, &score) in &dunn_scores {
        if score > best_score {
            best_score = score;
            best_k = Some(k);
        }
    }

    match best_k {
        Some(k) if k > 2 => Ok(SingleKSelection {
            k,
            dunn_scores,
            gap: None,
        }),
        _ => {
            // Either the score chose 2, or no candidate was scoreable
            // (nearly degenerate data); in both cases the gap statistic
            // decides between 1 and 2.
            let gap = gap_statistic(points, gap_b, derive_seed(seed, 77))?;
            Ok(SingleKSelection {
                k: gap.chosen_k,
                dunn_scores,
                gap: Some(gap),
            })
        }
    }
}

/// Selects the joint cluster count k0 = min(k1, k2).
///
/// Each group is clustered separately; the pooled data is never used here,
/// which keeps a pure treatment shift from being mistaken for a pair of
/// clusters.
pub fn select_k0(
    x1: &PointSet,
    x2: &PointSet,
    k_max: usize,
    gap_b: usize,
    seed: u64,
) -> Result<KSelection> {
    super::validate_nonempty(x1)?;
    super::validate_nonempty(x2)?;
    // Both groups use the same derived stream so that swapping the groups
    // swaps (k1, k2) exactly.
    let group_seed = derive_seed(seed, 1);
    let group1 = select_k_single(x1, k_max, gap_b, group_seed)?;
    let group2 = select_k_single(x2, k_max, gap_b, group_seed)?;
    let k0 = group1.k.min(group2.k);
    Ok(KSelection { group1, group2, k0 })
}
