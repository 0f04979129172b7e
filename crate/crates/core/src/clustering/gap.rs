//! Gap statistic restricted to the choice between one and two clusters.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::validity::within_dispersion;
use crate::data::PointSet;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Outcome of the gap comparison between k = 1 and k = 2.
#[derive(Debug, Clone, Serialize)]
pub struct GapDecision {
    /// Gap(k) for k = 1, 2.
    pub gap: [f64; 2],
    /// Reference-spread term s_k (already includes the sqrt(1 + 1/B) factor).
    pub s: [f64; 2],
    /// log W_k of the observed data for k = 1, 2.
    pub log_w_obs: [f64; 2],
    /// The chosen number of clusters, 1 or 2.
    pub chosen_k: usize,
}

/// Decides between one and two clusters.
///
/// Compares the log within-cluster dispersion of the observed data against
/// `b` reference datasets drawn uniformly over the data's principal-axis
/// bounding box, clustering both with PAM. One standard-error rule: k = 1 is
/// chosen iff Gap(1) >= Gap(2) - s_2.
///
/// The reference box is aligned with the principal axes rather than the
/// coordinate axes; an axis-aligned box makes strongly correlated data look
/// clustered relative to the reference.
pub fn gap_statistic(points: &PointSet, b: usize, seed: u64) -> Result<GapDecision> {
    if b < 1 {
        return Err(Error::invalid("gap statistic needs at least one reference draw"));
    }
    let n = points.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "gap statistic needs at least 2 points (got {n})"
        )));
    }

    let w_obs = [
        dispersion_for_k(points, 1, derive_seed(seed, 101))?,
        dispersion_for_k(points, 2, derive_seed(seed, 102))?,
    ];

    // All points identical: no dispersion at any k.
    if w_obs[0] <= 0.0 {
        return Ok(GapDecision {
            gap: [0.0, 0.0],
            s: [0.0, 0.0],
            log_w_obs: [f64::NEG_INFINITY, f64::NEG_INFINITY],
            chosen_k: 1,
        });
    }
    // Two clusters capture the data exactly (at most two distinct values):
    // the gap at k = 2 is unbounded.
    if w_obs[1] <= 0.0 {
        return Ok(GapDecision {
            gap: [0.0, f64::INFINITY],
            s: [0.0, 0.0],
            log_w_obs: [w_obs[0].ln(), f64::NEG_INFINITY],
            chosen_k: 2,
        });
    }

    let reference = ReferenceBox::fit(points);
    let mut rng = rng_from_seed(derive_seed(seed, 7));
    let mut log_w_ref = [Vec::with_capacity(b), Vec::with_capacity(b)];
    for rep in 0..b {
        let sample = reference.sample(n, &mut rng);
        for k in 1..=2usize {
            let w = dispersion_for_k(
                &sample,
                k,
                derive_seed(seed, 1000 + 2 * rep as u64 + k as u64),
            )?;
            // A fully degenerate box can collapse; fall back to the observed
            // dispersion so the draw carries no signal either way.
            let w = if w > 0.0 { w } else { w_obs[k - 1] };
            log_w_ref[k - 1].push(w.ln());
        }
    }

    let mut gap = [0.0; 2];
    let mut s = [0.0; 2];
    let bf = b as f64;
    for k in 0..2 {
        let mean = log_w_ref[k].iter().sum::<f64>() / bf;
        gap[k] = mean - w_obs[k].ln();
        let var = log_w_ref[k]
            .iter()
            .map(|lw| (lw - mean) * (lw - mean))
            .sum::<f64>()
            / bf;
        s[k] = var.sqrt() * (1.0 + 1.0 / bf).sqrt();
    }

    let chosen_k = if gap[0] >= gap[1] - s[1] { 1 } else { 2 };
    Ok(GapDecision {
        gap,
        s,
        log_w_obs: [w_obs[0].ln(), w_obs[1].ln()],
        chosen_k,
    })
}

/// Uniform reference distribution over the principal-axis bounding box of a
/// point set.
struct ReferenceBox {
    mean: DVector<f64>,
    /// Right singular vectors of the centered data (columns are axes).
    axes: DMatrix<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ReferenceBox {
    fn fit(points: &PointSet) -> Self {
        let n = points.len();
        let d = points.dim();
        let mean = DVector::from_vec(points.mean());
        let mut centered = DMatrix::zeros(n, d);
        for (i, p) in points.iter().enumerate() {
            for j in 0..d {
                centered[(i, j)] = p[j] - mean[j];
            }
        }
        let axes = if d == 1 {
            DMatrix::identity(1, 1)
        } else {
            let svd = centered.clone().svd(false, true);
            svd.v_t.expect("requested V^T").transpose()
        };
        let rotated = centered * &axes;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for i in 0..n {
            for j in 0..d {
                lo[j] = lo[j].min(rotated[(i, j)]);
                hi[j] = hi[j].max(rotated[(i, j)]);
            }
        }
        ReferenceBox { mean, axes, lo, hi }
    }

    fn sample(&self, n: usize, rng: &mut impl Rng) -> PointSet {
        let d = self.mean.len();
        let mut out = PointSet::with_capacity(n, d);
        let mut z = DVector::zeros(d);
        for _ in 0..n {
            for j in 0..d {
                z[j] = if self.hi[j] > self.lo[j] {
                    rng.random_range(self.lo[j]..self.hi[j])
                } else {
                    self.lo[j]
                };
            }
            let x = &self.axes * &z + &self.mean;
            out.push(x.as_slice());
        }
        out
    }
}

fn dispersion_for_k(points: &PointSet, k: usize, seed: u64) -> Result<f64> {
    if k == 1 {
        // W_1 does not depend on the clustering at all.
        let single = super::ClusterAssignment::new(
            vec![0; points.len()],
            vec![0],
            vec![false; points.len()],
        );
        return Ok(within_dispersion(points, &single));
    }
    let assignment = super::pam::pam(points, k, seed)?;
    Ok(within_dispersion(points, &assignment))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_clusters_choose_two() {
        // 25 points near 0 and 25 near 10.
        let mut values = Vec::new();
        for i in 0..25 {
            values.push((i as f64) * 0.01);
            values.push(10.0 + (i as f64) * 0.01);
        }
        let points = PointSet::univariate(&values).unwrap();
        for seed in [1u64, 2, 3] {
            let d = gap_statistic(&points, 50, seed).unwrap();
            assert_eq!(d.chosen_k, 2, "seed {seed}: {d:?}");
        }
    }

    #[test]
    fn single_uniform_sample_chooses_one() {
        // Uniform(0,1) data, the reference distribution itself. The one
        // standard-error rule is noisy at this boundary, so the check uses a
        // fixed draw rather than claiming it for every uniform sample.
        let mut rng = rng_from_seed(100);
        let values: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..1.0)).collect();
        let points = PointSet::univariate(&values).unwrap();
        for seed in [1u64, 2, 3] {
            let d = gap_statistic(&points, 50, seed).unwrap();
            assert_eq!(d.chosen_k, 1, "seed {seed}: {d:?}");
        }
    }

    #[test]
    fn gaussian_cloud_chooses_one() {
        use rand_distr::{Distribution, StandardNormal};
        for obs_seed in 0..20u64 {
            let mut rng = rng_from_seed(2000 + obs_seed);
            let values: Vec<f64> = (0..50)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z
                })
                .collect();
            let points = PointSet::univariate(&values).unwrap();
            let d = gap_statistic(&points, 50, 1).unwrap();
            assert_eq!(d.chosen_k, 1, "obs_seed {obs_seed}");
        }
    }

    #[test]
    fn correlated_gaussian_cloud_chooses_one() {
        // Strong correlation: an axis-aligned reference box would call this
        // clustered; the principal-axis box must not.
        use rand_distr::{Distribution, StandardNormal};
        let mut wrong = 0;
        for obs_seed in 0..20u64 {
            let mut rng = rng_from_seed(3000 + obs_seed);
            let rows: Vec<Vec<f64>> = (0..40)
                .map(|_| {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    vec![z1, 0.95 * z1 + 0.1 * z2]
                })
                .collect();
            let points = PointSet::from_rows(&rows).unwrap();
            let d = gap_statistic(&points, 50, 1).unwrap();
            if d.chosen_k != 1 {
                wrong += 1;
            }
        }
        assert!(wrong <= 2, "chose k=2 for {wrong}/20 correlated clouds");
    }

    #[test]
    fn identical_points_choose_one() {
        let points = PointSet::univariate(&[4.0; 20]).unwrap();
        let d = gap_statistic(&points, 10, 5).unwrap();
        assert_eq!(d.chosen_k, 1);
    }

    #[test]
    fn two_distinct_values_choose_two() {
        let mut values = vec![0.0; 10];
        values.extend(vec![5.0; 10]);
        let points = PointSet::univariate(&values).unwrap();
        let d = gap_statistic(&points, 10, 5).unwrap();
        assert_eq!(d.chosen_k, 2);
    }

    #[test]
    fn rejects_zero_references() {
        let points = PointSet::univariate(&[0.0, 1.0]).unwrap();
        assert!(gap_statistic(&points, 0, 1).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = rng_from_seed(7);
        let values: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let points = PointSet::univariate(&values).unwrap();
        let a = gap_statistic(&points, 25, 11).unwrap();
        let b = gap_statistic(&points, 25, 11).unwrap();
        assert_eq!(a.gap, b.gap);
        assert_eq!(a.chosen_k, b.chosen_k);
    }
}
