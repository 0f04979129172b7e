//! PAM (partitioning around medoids) with the classical BUILD and SWAP phases.

use rand::Rng;

use super::{ClusterAssignment, DistanceMatrix};
use crate::data::PointSet;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const MAX_SWAP_PASSES: usize = 200;

/// Partitions `points` into `k` clusters around medoids.
///
/// BUILD greedily seeds the medoids, SWAP then applies the best improving
/// (medoid, non-medoid) exchange until no exchange lowers the total
/// point-to-medoid distance. The search is deterministic; the seed only
/// breaks exact cost ties. Every point is assigned to its nearest medoid and
/// clusters are relabeled so medoid point indices are increasing.
pub fn pam(points: &PointSet, k: usize, seed: u64) -> Result<ClusterAssignment> {
    super::validate_nonempty(points)?;
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "k must be in 1..={n} (got {k})"
        )));
    }

    if k == n {
        // Degenerate partition: each point is its own medoid, cost 0.
        let labels: Vec<usize> = (0..n).collect();
        let medoids: Vec<usize> = (0..n).collect();
        return Ok(ClusterAssignment::new(labels, medoids, vec![false; n]));
    }

    let dist = DistanceMatrix::build(points);
    let (medoids, _trace) = pam_core(&dist, k, seed);
    Ok(assign_to_medoids(&dist, &medoids))
}

/// Runs BUILD + SWAP and returns the medoid set along with the cost after
/// each accepted swap (starting with the BUILD cost).
pub(crate) fn pam_core(dist: &DistanceMatrix, k: usize, seed: u64) -> (Vec<usize>, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let n = dist.len();

    let mut medoids = build_phase(dist, k, &mut rng);
    let mut cost = total_cost(dist, &medoids);
    let mut trace = vec![cost];

    for _ in 0..MAX_SWAP_PASSES {
        let mut best_cost = cost;
        let mut best_swaps: Vec<(usize, usize)> = Vec::new();
        for m_idx in 0..k {
            for h in 0..n {
                if medoids.contains(&h) {
                    continue;
                }
                let saved = medoids[m_idx];
                medoids[m_idx] = h;
                let c = total_cost(dist, &medoids);
                medoids[m_idx] = saved;
                if c < best_cost {
                    best_cost = c;
                    best_swaps.clear();
                    best_swaps.push((m_idx, h));
                } else if c == best_cost && c < cost {
                    best_swaps.push((m_idx, h));
                }
            }
        }
        if best_swaps.is_empty() {
            break;
        }
        let pick = if best_swaps.len() == 1 {
            best_swaps[0]
        } else {
            best_swaps[rng.random_range(0..best_swaps.len())]
        };
        medoids[pick.0] = pick.1;
        cost = best_cost;
        trace.push(cost);
    }

    medoids.sort_unstable();
    (medoids, trace)
}

fn build_phase(dist: &DistanceMatrix, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = dist.len();
    let mut medoids = Vec::with_capacity(k);

    // First medoid: the point minimizing total distance to all others.
    let mut best = f64::INFINITY;
    let mut ties: Vec<usize> = Vec::new();
    for i in 0..n {
        let total: f64 = (0..n).map(|j| dist.get(i, j)).sum();
        if total < best {
            best = total;
            ties.clear();
            ties.push(i);
        } else if total == best {
            ties.push(i);
        }
    }
    medoids.push(pick_tie(&ties, rng));

    // Nearest-medoid distance per point, updated as medoids are added.
    let mut nearest: Vec<f64> = (0..n).map(|j| dist.get(medoids[0], j)).collect();

    while medoids.len() < k {
        let mut best_gain = f64::NEG_INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for i in 0..n {
            if medoids.contains(&i) {
                continue;
            }
            let gain: f64 = (0..n)
                .map(|j| (nearest[j] - dist.get(i, j)).max(0.0))
                .sum();
            if gain > best_gain {
                best_gain = gain;
                ties.clear();
                ties.push(i);
            } else if gain == best_gain {
                ties.push(i);
            }
        }
        let chosen = pick_tie(&ties, rng);
        medoids.push(chosen);
        for j in 0..n {
            let d = dist.get(chosen, j);
            if d < nearest[j] {
                nearest[j] = d;
            }
        }
    }
    medoids
}

fn pick_tie(ties: &[usize], rng: &mut impl Rng) -> usize {
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    }
}

fn total_cost(dist: &DistanceMatrix, medoids: &[usize]) -> f64 {
    let n = dist.len();
    let mut cost = 0.0;
    for j in 0..n {
        let mut nearest = f64::INFINITY;
        for &m in medoids {
            let d = dist.get(m, j);
            if d < nearest {
                nearest = d;
            }
        }
        cost += nearest;
    }
    cost
}

fn assign_to_medoids(dist: &DistanceMatrix, medoids: &[usize]) -> ClusterAssignment {
    let n = dist.len();
    let mut labels = vec![0usize; n];
    // Medoids always stay in their own cluster, even when duplicate points
    // make another medoid equally close.
    for (r, &m) in medoids.iter().enumerate() {
        labels[m] = r;
    }
    for j in 0..n {
        if medoids.contains(&j) {
            continue;
        }
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (r, &m) in medoids.iter().enumerate() {
            let d = dist.get(m, j);
            if d < best_d {
                best_d = d;
                best = r;
            }
        }
        labels[j] = best;
    }
    ClusterAssignment::new(labels, medoids.to_vec(), vec![false; n])
}
