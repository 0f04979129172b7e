//! Multivariate two-sample statistics: Hotelling T², the coordinate-wise
//! rank quadratic form, and the spatial-rank quadratic form.
//!
//! All three are nonnegative with large values indicating group separation;
//! their cut-offs come from the permutation engine. Each statistic has a
//! prepared evaluator so the permutation loop only re-aggregates group sums
//! instead of recomputing pooled quantities.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{midranks, Group, LabeledPool};
use crate::data::PointSet;
use crate::error::{Error, Result};

/// Relative eigenvalue threshold below which a scatter matrix is singular.
const SINGULARITY_RTOL: f64 = 1e-10;

/// Ridge applied to a pooled covariance that fails to factor.
const POOLED_RIDGE_EPS: f64 = 1e-6;

/// Hotelling T²: (n1 n2 / n) (mean1 - mean2)' S⁻¹ (mean1 - mean2) with the
/// pooled covariance S on n - 2 degrees of freedom.
pub fn hotelling_t2(x1: &PointSet, x2: &PointSet) -> Result<f64> {
    let pool = LabeledPool::from_pair(x1, x2)?;
    let eval = HotellingEval::prepare(&pool)?;
    eval.evaluate(&pool.labels)
}

/// Upper-tail F p-value for an observed T², usable when the Gaussian
/// assumption is taken at face value instead of permuting.
pub fn hotelling_f_pvalue(t2: f64, n1: usize, n2: usize, d: usize) -> Result<f64> {
    let n = (n1 + n2) as f64;
    let df2 = n - d as f64 - 1.0;
    if df2 <= 0.0 {
        return Err(Error::invalid(
            "F conversion needs n1 + n2 - d - 1 > 0",
        ));
    }
    let f_stat = t2 * df2 / (d as f64 * (n - 2.0));
    let dist = FisherSnedecor::new(d as f64, df2)
        .map_err(|e| Error::numerical(format!("F distribution: {e}")))?;
    Ok((1.0 - dist.cdf(f_stat)).clamp(0.0, 1.0))
}

/// Coordinate-wise rank statistic: the centered vector of per-coordinate
/// treatment rank sums, standardized by its exact permutation covariance.
pub fn coordwise_rank_stat(x1: &PointSet, x2: &PointSet) -> Result<f64> {
    let pool = LabeledPool::from_pair(x1, x2)?;
    let eval = CoordRankEval::prepare(&pool)?;
    eval.evaluate(&pool.labels)
}

/// Spatial-rank statistic: n times the squared norm of the treatment group's
/// mean spatial rank in the metric of the pooled rank scatter.
pub fn spatial_rank_stat(x1: &PointSet, x2: &PointSet) -> Result<f64> {
    let pool = LabeledPool::from_pair(x1, x2)?;
    let eval = SpatialRankEval::prepare(&pool)?;
    eval.evaluate(&pool.labels)
}

/// Hotelling evaluator. Group moments change under relabeling, so evaluation
/// recomputes them; only the dimension bookkeeping is prepared.
pub(crate) struct HotellingEval {
    points: PointSet,
}

impl HotellingEval {
    pub(crate) fn prepare(pool: &LabeledPool) -> Result<Self> {
        let d = pool.points.dim();
        if pool.n1 + pool.n2 <= d + 2 {
            return Err(Error::invalid(format!(
                "Hotelling T2 needs n1 + n2 - 2 > d (n = {}, d = {d})",
                pool.n1 + pool.n2
            )));
        }
        Ok(HotellingEval {
            points: pool.points.clone(),
        })
    }

    pub(crate) fn evaluate(&self, labels: &[Group]) -> Result<f64> {
        let d = self.points.dim();
        let n = self.points.len();
        let mut mean1 = DVector::zeros(d);
        let mut mean2 = DVector::zeros(d);
        let mut n1 = 0usize;
        for (p, &g) in self.points.iter().zip(labels) {
            match g {
                Group::Control => {
                    n1 += 1;
                    for j in 0..d {
                        mean1[j] += p[j];
                    }
                }
                Group::Treatment => {
                    for j in 0..d {
                        mean2[j] += p[j];
                    }
                }
            }
        }
        let n2 = n - n1;
        mean1 /= n1 as f64;
        mean2 /= n2 as f64;

        let mut scatter = DMatrix::zeros(d, d);
        let mut diff = DVector::zeros(d);
        for (p, &g) in self.points.iter().zip(labels) {
            let mean = match g {
                Group::Control => &mean1,
                Group::Treatment => &mean2,
            };
            for j in 0..d {
                diff[j] = p[j] - mean[j];
            }
            scatter.ger(1.0, &diff, &diff, 1.0);
        }
        let pooled = scatter / (n as f64 - 2.0);

        let delta = &mean1 - &mean2;
        let solved = solve_spd(&pooled, &delta)?;
        let t2 = (n1 as f64 * n2 as f64 / n as f64) * delta.dot(&solved);
        Ok(t2.max(0.0))
    }
}

/// Solves S x = b for symmetric positive-definite S, applying a scaled-ridge
/// rescue once before giving up.
fn solve_spd(s: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(chol) = nalgebra::Cholesky::new(s.clone()) {
        return Ok(chol.solve(b));
    }
    let d = s.nrows();
    let mut scale = s.trace() / d as f64;
    if scale <= 0.0 {
        return Err(Error::numerical("pooled covariance has non-positive trace"));
    }
    scale *= POOLED_RIDGE_EPS;
    let mut ridged = s.clone();
    for j in 0..d {
        ridged[(j, j)] += scale;
    }
    nalgebra::Cholesky::new(ridged)
        .map(|chol| chol.solve(b))
        .ok_or_else(|| Error::numerical("pooled covariance singular beyond ridge rescue"))
}

/// Coordinate-wise rank evaluator. Pooled midranks and the permutation
/// covariance of the rank-sum vector are label-free, so they are prepared
/// once; evaluation only sums treatment ranks.
pub(crate) struct CoordRankEval {
    /// Midranks per point (row-major n x d).
    ranks: Vec<f64>,
    cov_inv: DMatrix<f64>,
    n: usize,
    d: usize,
}

impl CoordRankEval {
    pub(crate) fn prepare(pool: &LabeledPool) -> Result<Self> {
        let n = pool.points.len();
        let d = pool.points.dim();
        let n1 = pool.n1 as f64;
        let n2 = pool.n2 as f64;

        let mut ranks = vec![0.0; n * d];
        for j in 0..d {
            let col = pool.points.column(j);
            for (i, r) in midranks(&col).into_iter().enumerate() {
                ranks[i * d + j] = r;
            }
        }

        // Permutation covariance of the treatment rank-sum vector:
        // n1 n2 / (n (n-1)) * sum_i (R_i - mean)(R_i - mean)'.
        let center = (n as f64 + 1.0) / 2.0;
        let mut v = DMatrix::zeros(d, d);
        let mut diff = DVector::zeros(d);
        for i in 0..n {
            for j in 0..d {
                diff[j] = ranks[i * d + j] - center;
            }
            v.ger(1.0, &diff, &diff, 1.0);
        }
        let cov = v * (n1 * n2 / (n as f64 * (n as f64 - 1.0)));
        let cov_inv = invert_spd_checked(&cov, "coordinate-wise rank covariance")?;
        Ok(CoordRankEval {
            ranks,
            cov_inv,
            n,
            d,
        })
    }

    pub(crate) fn evaluate(&self, labels: &[Group]) -> Result<f64> {
        let n2 = labels.iter().filter(|&&g| g == Group::Treatment).count();
        let mut u = DVector::zeros(self.d);
        for (i, &g) in labels.iter().enumerate() {
            if g == Group::Treatment {
                for j in 0..self.d {
                    u[j] += self.ranks[i * self.d + j];
                }
            }
        }
        let expected = n2 as f64 * (self.n as f64 + 1.0) / 2.0;
        for j in 0..self.d {
            u[j] -= expected;
        }
        Ok((&self.cov_inv * &u).dot(&u).max(0.0))
    }
}

/// Spatial-rank evaluator. Spatial ranks of the pooled points and their
/// scatter matrix are label-free; evaluation averages the treatment group's
/// ranks.
pub(crate) struct SpatialRankEval {
    /// Spatial rank per point (row-major n x d).
    ranks: Vec<f64>,
    b_inv: DMatrix<f64>,
    d: usize,
}

impl SpatialRankEval {
    pub(crate) fn prepare(pool: &LabeledPool) -> Result<Self> {
        let n = pool.points.len();
        let d = pool.points.dim();
        let mut ranks = vec![0.0; n * d];
        // Antisymmetric accumulation: each pair contributes its unit vector
        // to one point and the negation to the other.
        for i in 0..n {
            for l in (i + 1)..n {
                let pi = pool.points.point(i);
                let pl = pool.points.point(l);
                let mut norm = 0.0;
                for j in 0..d {
                    let v = pi[j] - pl[j];
                    norm += v * v;
                }
                if norm == 0.0 {
                    continue;
                }
                let norm = norm.sqrt();
                for j in 0..d {
                    let unit = (pi[j] - pl[j]) / norm;
                    ranks[i * d + j] += unit;
                    ranks[l * d + j] -= unit;
                }
            }
        }
        let nf = n as f64;
        for r in ranks.iter_mut() {
            *r /= nf;
        }

        let mut b = DMatrix::zeros(d, d);
        let mut ri = DVector::zeros(d);
        for i in 0..n {
            for j in 0..d {
                ri[j] = ranks[i * d + j];
            }
            b.ger(1.0, &ri, &ri, 1.0);
        }
        b /= nf;
        let b_inv = invert_spd_checked(&b, "spatial rank scatter")?;
        Ok(SpatialRankEval { ranks, b_inv, d })
    }

    pub(crate) fn evaluate(&self, labels: &[Group]) -> Result<f64> {
        let n = labels.len();
        let n2 = labels.iter().filter(|&&g| g == Group::Treatment).count();
        let mut mean2 = DVector::zeros(self.d);
        for (i, &g) in labels.iter().enumerate() {
            if g == Group::Treatment {
                for j in 0..self.d {
                    mean2[j] += self.ranks[i * self.d + j];
                }
            }
        }
        mean2 /= n2 as f64;
        Ok((n as f64 * (&self.b_inv * &mean2).dot(&mean2)).max(0.0))
    }

    #[cfg(test)]
    pub(crate) fn rank_of(&self, i: usize) -> &[f64] {
        &self.ranks[i * self.d..(i + 1) * self.d]
    }
}

/// Inverts a symmetric PSD matrix through its eigendecomposition, failing
/// when the relative condition reveals rank deficiency.
fn invert_spd_checked(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::numerical(format!("{what} is singular")));
    }
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= SINGULARITY_RTOL * max {
        return Err(Error::numerical(format!(
            "{what} is singular (relative eigenvalue {:.2e})",
            min / max
        )));
    }
    let v = &eig.eigenvectors;
    let mut inv = DMatrix::zeros(d, d);
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let col = v.column(j);
        inv.ger(1.0 / l, &col, &col, 1.0);
    }
    let t = inv.transpose();
    Ok((inv + t) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stats::tie_correction_sum;
    use crate::stats::univariate::raw_t_statistic;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_cloud(
        n: usize,
        mean: &[f64],
        rng: &mut impl rand::Rng,
    ) -> PointSet {
        let d = mean.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|j| {
                        let z: f64 = StandardNormal.sample(rng);
                        mean[j] + z
                    })
                    .collect()
            })
            .collect();
        PointSet::from_rows(&rows).unwrap()
    }

    #[test]
    fn hotelling_zero_for_identical_groups() {
        let mut rng = rng_from_seed(1);
        let x = gaussian_cloud(15, &[0.0, 0.0], &mut rng);
        let t2 = hotelling_t2(&x, &x).unwrap();
        assert!(t2.abs() < 1e-18, "t2 = {t2}");
    }

    #[test]
    fn hotelling_univariate_equals_t_squared() {
        let mut rng = rng_from_seed(2);
        let x = gaussian_cloud(12, &[0.0], &mut rng);
        let y = gaussian_cloud(17, &[0.8], &mut rng);
        let t2 = hotelling_t2(&x, &y).unwrap();
        let t = raw_t_statistic(&x.values().unwrap(), &y.values().unwrap());
        assert_relative_eq!(t2, t * t, epsilon = 1e-10);
    }

    #[test]
    fn hotelling_respects_axis_permutation() {
        let mut rng = rng_from_seed(3);
        let x = gaussian_cloud(20, &[0.0, 1.0], &mut rng);
        let y = gaussian_cloud(20, &[0.5, 0.2], &mut rng);
        let t2 = hotelling_t2(&x, &y).unwrap();
        let flip = |p: &PointSet| {
            PointSet::from_rows(
                &p.iter().map(|q| vec![q[1], q[0]]).collect::<Vec<_>>(),
            )
            .unwrap()
        };
        let t2_flipped = hotelling_t2(&flip(&x), &flip(&y)).unwrap();
        assert_relative_eq!(t2, t2_flipped, epsilon = 1e-9);
    }

    #[test]
    fn hotelling_demands_enough_observations() {
        let x = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(hotelling_t2(&x, &x).is_err());
    }

    #[test]
    fn coordwise_zero_for_identical_groups() {
        let mut rng = rng_from_seed(4);
        let x = gaussian_cloud(10, &[0.0, 0.0], &mut rng);
        let s = coordwise_rank_stat(&x, &x).unwrap();
        assert!(s.abs() < 1e-18, "s = {s}");
    }

    #[test]
    fn coordwise_univariate_equals_squared_standardized_wmw() {
        let mut rng = rng_from_seed(5);
        let x = gaussian_cloud(14, &[0.0], &mut rng);
        let y = gaussian_cloud(11, &[0.6], &mut rng);
        let s = coordwise_rank_stat(&x, &y).unwrap();

        // Squared standardized U with tie-corrected variance, no continuity
        // correction.
        let pooled: Vec<f64> = x
            .values()
            .unwrap()
            .into_iter()
            .chain(y.values().unwrap())
            .collect();
        let ranks = midranks(&pooled);
        let (n1, n2) = (14.0f64, 11.0f64);
        let n = 25.0f64;
        let u: f64 = ranks[14..].iter().sum::<f64>() - n2 * (n2 + 1.0) / 2.0;
        let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_correction_sum(&pooled) / (n * (n - 1.0)));
        let z2 = (u - n1 * n2 / 2.0).powi(2) / var;
        assert_relative_eq!(s, z2, epsilon = 1e-8);
    }

    #[test]
    fn coordwise_duplicated_coordinate_is_singular() {
        let mut rng = rng_from_seed(6);
        let base = gaussian_cloud(12, &[0.0], &mut rng);
        let doubled = PointSet::from_rows(
            &base.iter().map(|p| vec![p[0], p[0]]).collect::<Vec<_>>(),
        )
        .unwrap();
        let other = {
            let b = gaussian_cloud(12, &[0.5], &mut rng);
            PointSet::from_rows(&b.iter().map(|p| vec![p[0], p[0]]).collect::<Vec<_>>())
                .unwrap()
        };
        assert!(matches!(
            coordwise_rank_stat(&doubled, &other),
            Err(Error::NumericalFailure(_))
        ));
    }

    #[test]
    fn spatial_zero_for_identical_groups() {
        let mut rng = rng_from_seed(7);
        let x = gaussian_cloud(12, &[0.0, 0.0], &mut rng);
        let s = spatial_rank_stat(&x, &x).unwrap();
        assert!(s.abs() < 1e-18, "s = {s}");
    }

    #[test]
    fn spatial_ranks_sum_to_zero() {
        let mut rng = rng_from_seed(8);
        let x = gaussian_cloud(15, &[0.0, 0.0], &mut rng);
        let y = gaussian_cloud(10, &[1.0, -1.0], &mut rng);
        let pool = LabeledPool::from_pair(&x, &y).unwrap();
        let eval = SpatialRankEval::prepare(&pool).unwrap();
        let mut sum = [0.0f64; 2];
        for i in 0..25 {
            let r = eval.rank_of(i);
            sum[0] += r[0];
            sum[1] += r[1];
        }
        assert!(sum[0].abs() < 1e-10 && sum[1].abs() < 1e-10, "sum = {sum:?}");
    }

    #[test]
    fn spatial_univariate_reduces_to_sign_rank_form() {
        let mut rng = rng_from_seed(9);
        let x = gaussian_cloud(13, &[0.0], &mut rng);
        let y = gaussian_cloud(9, &[0.7], &mut rng);
        let pool = LabeledPool::from_pair(&x, &y).unwrap();
        let eval = SpatialRankEval::prepare(&pool).unwrap();
        // In one dimension the spatial rank is 2 (midrank - (n+1)/2) / n.
        let pooled: Vec<f64> = pool.points.column(0);
        let mid = midranks(&pooled);
        let n = pooled.len() as f64;
        for i in 0..pooled.len() {
            let expect = 2.0 * (mid[i] - (n + 1.0) / 2.0) / n;
            assert_relative_eq!(eval.rank_of(i)[0], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn spatial_far_groups_saturate() {
        let mut rng = rng_from_seed(10);
        let x = gaussian_cloud(20, &[0.0, 0.0], &mut rng);
        let y = gaussian_cloud(20, &[50.0, 0.0], &mut rng);
        let pool = LabeledPool::from_pair(&x, &y).unwrap();
        let eval = SpatialRankEval::prepare(&pool).unwrap();
        // Treatment points all sit far right: their mean spatial rank norm
        // approaches n1/n (unit vectors toward the control cloud).
        let mut mean = [0.0f64; 2];
        for i in 20..40 {
            mean[0] += eval.rank_of(i)[0];
            mean[1] += eval.rank_of(i)[1];
        }
        mean[0] /= 20.0;
        mean[1] /= 20.0;
        let norm = (mean[0] * mean[0] + mean[1] * mean[1]).sqrt();
        assert!(norm > 0.45, "norm = {norm}"); // n1/n = 0.5 is the ceiling
        let s = spatial_rank_stat(&x, &y).unwrap();
        assert!(s > 20.0, "s = {s}");
    }

    #[test]
    fn spatial_identical_points_rejected() {
        let x = PointSet::from_rows(&vec![vec![1.0, 1.0]; 5]).unwrap();
        assert!(spatial_rank_stat(&x, &x).is_err());
    }

    #[test]
    fn coordwise_and_spatial_respect_axis_permutation() {
        let mut rng = rng_from_seed(11);
        let x = gaussian_cloud(18, &[0.0, 0.3], &mut rng);
        let y = gaussian_cloud(15, &[0.4, -0.1], &mut rng);
        let flip = |p: &PointSet| {
            PointSet::from_rows(
                &p.iter().map(|q| vec![q[1], q[0]]).collect::<Vec<_>>(),
            )
            .unwrap()
        };
        let c = coordwise_rank_stat(&x, &y).unwrap();
        let cf = coordwise_rank_stat(&flip(&x), &flip(&y)).unwrap();
        assert_relative_eq!(c, cf, epsilon = 1e-9);
        let s = spatial_rank_stat(&x, &y).unwrap();
        let sf = spatial_rank_stat(&flip(&x), &flip(&y)).unwrap();
        assert_relative_eq!(s, sf, epsilon = 1e-9);
    }

    #[test]
    fn f_pvalue_sane_range() {
        let p = hotelling_f_pvalue(0.0, 20, 20, 2).unwrap();
        assert_relative_eq!(p, 1.0, epsilon = 1e-12);
        let p = hotelling_f_pvalue(60.0, 20, 20, 2).unwrap();
        assert!(p < 1e-6);
    }
}
