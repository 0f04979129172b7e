//! Equal-weight Gaussian mixtures fitted by EM, plus the posterior machinery
//! over cluster-label assignments used for model averaging.
//!
//! The mixture weights stay fixed at 1/k throughout: the prior over cluster
//! labels is uniform, so the label posterior factorizes over observations and
//! can be sampled exactly, one categorical draw per point.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::clustering::ClusterAssignment;
use crate::data::PointSet;
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453;

/// Relative ridge applied when a covariance eigenvalue collapses.
const COV_RIDGE_EPS: f64 = 1e-6;

/// One Gaussian sub-population: mean vector and covariance matrix.
#[derive(Debug, Clone)]
pub struct GaussianComponent {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    // Cached Cholesky factor of the (regularized) covariance.
    chol: Cholesky<f64, nalgebra::Dyn>,
    log_det: f64,
}

impl GaussianComponent {
    /// Builds a component, regularizing the covariance if needed.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::invalid(format!(
                "covariance is {}x{} but the mean has dimension {d}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let asym = (&cov - cov.transpose()).abs().max();
        let scale = cov.abs().max().max(1.0);
        if asym > 1e-10 * scale {
            return Err(Error::invalid("covariance is not symmetric"));
        }
        let mut cov = symmetrize(cov);
        regularize_covariance(&mut cov);
        let chol = Cholesky::new(cov.clone()).ok_or_else(|| {
            Error::numerical("covariance not positive definite after regularization")
        })?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(GaussianComponent {
            mean,
            cov,
            chol,
            log_det,
        })
    }

    /// Component from the sample moments of `points` (covariance divisor n).
    pub fn from_sample(points: &PointSet) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("cannot estimate moments of an empty set"));
        }
        let (mean, cov) = sample_moments(points.iter(), points.len(), points.dim());
        GaussianComponent::new(mean, cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// log N(x; mean, cov).
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "point has dimension {}, component expects {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point has non-finite coordinates"));
        }
        let diff = DVector::from_column_slice(x) - &self.mean;
        let solved = self.chol.solve(&diff);
        let quad = diff.dot(&solved);
        Ok(-0.5 * (self.dim() as f64 * LN_2PI + self.log_det + quad))
    }
}

/// A k-component Gaussian mixture with weights fixed at 1/k.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    components: Vec<GaussianComponent>,
    log_likelihood: f64,
    ll_trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

impl MixtureModel {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn component(&self, r: usize) -> &GaussianComponent {
        &self.components[r]
    }

    /// The fixed mixing weight, 1/k for every component.
    pub fn weight(&self) -> f64 {
        1.0 / self.k() as f64
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Log-likelihood after each EM iteration, starting at the initial fit.
    pub fn ll_trace(&self) -> &[f64] {
        &self.ll_trace
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }
}

/// Labels for both groups under one joint cluster assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentPair {
    pub labels1: Vec<usize>,
    pub labels2: Vec<usize>,
}

impl AssignmentPair {
    pub fn n(&self) -> usize {
        self.labels1.len() + self.labels2.len()
    }

    /// All labels, group 1 first.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels1.iter().chain(self.labels2.iter()).copied()
    }
}

/// Fits a k0-component equal-weight Gaussian mixture by EM.
///
/// Initial means and covariances are the per-cluster sample moments of
/// `init`; clusters with fewer than d + 1 members fall back to the pooled
/// covariance. The M-step updates means and covariances only. Iteration
/// stops when the relative log-likelihood change drops below `tol` or after
/// `max_iter` iterations.
pub fn em_fit(
    points: &PointSet,
    k0: usize,
    init: &ClusterAssignment,
    tol: f64,
    max_iter: usize,
) -> Result<MixtureModel> {
    let n = points.len();
    let d = points.dim();
    if k0 == 0 {
        return Err(Error::invalid("k0 must be positive"));
    }
    if n < k0 * (d + 1) {
        return Err(Error::invalid(format!(
            "need at least k0 * (d + 1) = {} points to fit {k0} components in dimension {d} (got {n})",
            k0 * (d + 1)
        )));
    }
    if init.k() != k0 {
        return Err(Error::invalid(format!(
            "initial assignment has {} clusters, expected {k0}",
            init.k()
        )));
    }
    if init.len() != n {
        return Err(Error::invalid(
            "initial assignment does not cover the point set",
        ));
    }
    if tol <= 0.0 {
        return Err(Error::invalid("tol must be positive"));
    }

    let (_, pooled_cov) = sample_moments(points.iter(), n, d);

    let mut components = Vec::with_capacity(k0);
    for r in 0..k0 {
        let members = init.members(r);
        let (mean, cov) = sample_moments(
            members.iter().map(|&i| points.point(i)),
            members.len(),
            d,
        );
        let cov = if members.len() < d + 1 {
            pooled_cov.clone()
        } else {
            cov
        };
        components.push(GaussianComponent::new(mean, cov)?);
    }

    let weight_ln = -(k0 as f64).ln();
    let mut log_like = f64::NAN;
    let mut ll_trace = Vec::new();
    let mut resp = vec![0.0f64; n * k0];
    let mut iterations = 0;
    let mut converged = false;

    for iter in 0..max_iter {
        iterations = iter + 1;

        // E-step in log space; also accumulates the mixture log-likelihood.
        let mut ll = 0.0;
        for (i, x) in points.iter().enumerate() {
            let row = &mut resp[i * k0..(i + 1) * k0];
            for (r, c) in components.iter().enumerate() {
                row[r] = c.log_density(x)?;
            }
            let lse = log_sum_exp(row);
            ll += lse + weight_ln;
            for v in row.iter_mut() {
                *v = (*v - lse).exp();
            }
        }
        if !ll.is_finite() {
            return Err(Error::numerical("mixture log-likelihood is not finite"));
        }
        ll_trace.push(ll);

        let done = iter > 0 && (ll - log_like).abs() <= tol * log_like.abs().max(1.0);
        log_like = ll;
        if done {
            converged = true;
            break;
        }

        // M-step: means and covariances; weights stay 1/k0.
        let mut next = Vec::with_capacity(k0);
        for (r, current) in components.iter().enumerate() {
            let total: f64 = (0..n).map(|i| resp[i * k0 + r]).sum();
            if total < 1e-12 {
                // Component lost all responsibility; keep its parameters.
                next.push(current.clone());
                continue;
            }
            let mut mean = DVector::zeros(d);
            for (i, x) in points.iter().enumerate() {
                let g = resp[i * k0 + r];
                for j in 0..d {
                    mean[j] += g * x[j];
                }
            }
            mean /= total;

            let mut cov = DMatrix::zeros(d, d);
            let mut diff = DVector::zeros(d);
            for (i, x) in points.iter().enumerate() {
                let g = resp[i * k0 + r];
                for j in 0..d {
                    diff[j] = x[j] - mean[j];
                }
                cov.ger(g, &diff, &diff, 1.0);
            }
            cov /= total;
            next.push(GaussianComponent::new(mean, symmetrize(cov))?);
        }
        components = next;
    }

    Ok(MixtureModel {
        components,
        log_likelihood: log_like,
        ll_trace,
        iterations,
        converged,
    })
}

/// Posterior probability of each component for one observation.
///
/// With equal priors this is the normalized component density, computed in
/// log space.
pub fn responsibilities(model: &MixtureModel, x: &[f64]) -> Result<Vec<f64>> {
    let mut log_p: Vec<f64> = model
        .components()
        .iter()
        .map(|c| c.log_density(x))
        .collect::<Result<_>>()?;
    let lse = log_sum_exp(&log_p);
    for v in &mut log_p {
        *v = (*v - lse).exp();
    }
    Ok(log_p)
}

/// Responsibility vectors for every point in a set.
pub fn responsibilities_matrix(model: &MixtureModel, points: &PointSet) -> Result<Vec<Vec<f64>>> {
    points.iter().map(|x| responsibilities(model, x)).collect()
}

/// Assigns each point to the component with the largest posterior
/// probability; exact ties go to the smaller component index.
pub fn map_assign(model: &MixtureModel, points: &PointSet) -> Result<Vec<usize>> {
    let mut labels = Vec::with_capacity(points.len());
    for x in points.iter() {
        let r = responsibilities(model, x)?;
        let mut best = 0usize;
        for (j, &p) in r.iter().enumerate().skip(1) {
            if p > r[best] {
                best = j;
            }
        }
        labels.push(best);
    }
    Ok(labels)
}

/// Log pseudo-likelihood of a labeled configuration: the summed log density
/// of every observation under the component its label names.
pub fn pseudo_log_likelihood(
    model: &MixtureModel,
    x1: &PointSet,
    x2: &PointSet,
    assignment: &AssignmentPair,
) -> Result<f64> {
    if assignment.labels1.len() != x1.len() || assignment.labels2.len() != x2.len() {
        return Err(Error::invalid("assignment length does not match the data"));
    }
    let k = model.k();
    let mut total = 0.0;
    for (points, labels) in [(x1, &assignment.labels1), (x2, &assignment.labels2)] {
        for (x, &label) in points.iter().zip(labels.iter()) {
            if label >= k {
                return Err(Error::invalid(format!(
                    "label {label} out of range for {k} components"
                )));
            }
            total += model.component(label).log_density(x)?;
        }
    }
    if !total.is_finite() {
        return Err(Error::numerical("pseudo-log-likelihood is not finite"));
    }
    Ok(total)
}

/// Draws one joint label assignment from the posterior over assignments.
///
/// The uniform label prior and the per-observation factorization of the
/// pseudo-likelihood make the posterior a product over observations, so each
/// label is an independent categorical draw from that point's
/// responsibilities — exact sampling, no Markov chain.
pub fn sample_assignment(
    model: &MixtureModel,
    x1: &PointSet,
    x2: &PointSet,
    rng: &mut impl Rng,
) -> Result<AssignmentPair> {
    let resp1 = responsibilities_matrix(model, x1)?;
    let resp2 = responsibilities_matrix(model, x2)?;
    Ok(sample_assignment_from(&resp1, &resp2, rng))
}

/// Draws a joint assignment from precomputed responsibility vectors.
pub fn sample_assignment_from(
    resp1: &[Vec<f64>],
    resp2: &[Vec<f64>],
    rng: &mut impl Rng,
) -> AssignmentPair {
    AssignmentPair {
        labels1: resp1.iter().map(|r| categorical_draw(r, rng)).collect(),
        labels2: resp2.iter().map(|r| categorical_draw(r, rng)).collect(),
    }
}

fn categorical_draw(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    probs.len() - 1
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Adds eps * (trace/d) * I whenever an eigenvalue falls below that level.
fn regularize_covariance(cov: &mut DMatrix<f64>) {
    let d = cov.nrows();
    let mut scale = cov.trace() / d as f64;
    if scale <= 0.0 {
        scale = 1.0;
    }
    let floor = COV_RIDGE_EPS * scale;
    let eig = SymmetricEigen::new(cov.clone());
    if eig.eigenvalues.iter().any(|&l| l < floor) {
        for j in 0..d {
            cov[(j, j)] += floor;
        }
    }
}

/// Mean and covariance (divisor n) of an iterator of points.
fn sample_moments<'a>(
    points: impl Iterator<Item = &'a [f64]> + Clone,
    n: usize,
    d: usize,
) -> (DVector<f64>, DMatrix<f64>) {
    let mut mean = DVector::zeros(d);
    if n == 0 {
        return (mean, DMatrix::identity(d, d));
    }
    for x in points.clone() {
        for j in 0..d {
            mean[j] += x[j];
        }
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(d, d);
    let mut diff = DVector::zeros(d);
    for x in points {
        for j in 0..d {
            diff[j] = x[j] - mean[j];
        }
        cov.ger(1.0, &diff, &diff, 1.0);
    }
    cov /= n as f64;
    (mean, symmetrize(cov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::pam;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

    fn fit_1d(values: &[f64], k: usize) -> MixtureModel {
        let points = PointSet::univariate(values).unwrap();
        let init = pam(&points, k, 0).unwrap();
        em_fit(&points, k, &init, 1e-8, 500).unwrap()
    }

    #[test]
    fn single_component_recovers_mle() {
        let model = fit_1d(&[0.0, 2.0], 1);
        assert_relative_eq!(model.component(0).mean()[0], 1.0, epsilon = 1e-10);
        // MLE variance with divisor n.
        assert_relative_eq!(model.component(0).covariance()[(0, 0)], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn single_component_matches_closed_form_in_2d() {
        let rows = vec![
            vec![1.0, 2.0],
            vec![3.0, -1.0],
            vec![0.0, 0.5],
            vec![2.0, 4.0],
            vec![-1.5, 1.0],
        ];
        let points = PointSet::from_rows(&rows).unwrap();
        let init = pam(&points, 1, 0).unwrap();
        let model = em_fit(&points, 1, &init, 1e-10, 200).unwrap();
        let (mean, cov) = sample_moments(points.iter(), points.len(), 2);
        for j in 0..2 {
            assert_relative_eq!(model.component(0).mean()[j], mean[j], epsilon = 1e-10);
        }
        for a in 0..2 {
            for b in 0..2 {
                assert_relative_eq!(
                    model.component(0).covariance()[(a, b)],
                    cov[(a, b)],
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn two_tight_clusters_recover_cluster_moments() {
        let mut rng = rng_from_seed(17);
        let mut values = Vec::new();
        use rand_distr::{Distribution, StandardNormal};
        for _ in 0..60 {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(0.0 + 0.2 * z);
        }
        for _ in 0..60 {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(10.0 + 0.2 * z);
        }
        let model = fit_1d(&values, 2);
        // Responsibilities are effectively 0/1, so component means must match
        // the per-cluster sample means.
        let m1: f64 = values[..60].iter().sum::<f64>() / 60.0;
        let m2: f64 = values[60..].iter().sum::<f64>() / 60.0;
        let mut fitted: Vec<f64> = model.components().iter().map(|c| c.mean()[0]).collect();
        fitted.sort_by(f64::total_cmp);
        let mut expect = [m1, m2];
        expect.sort_by(f64::total_cmp);
        assert!((fitted[0] - expect[0]).abs() < 0.1);
        assert!((fitted[1] - expect[1]).abs() < 0.1);
        assert!(model.converged());
    }

    #[test]
    fn rejects_too_few_points() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ];
        let points = PointSet::from_rows(&rows).unwrap();
        let init = pam(&points, 3, 0).unwrap();
        let err = em_fit(&points, 3, &init, 1e-8, 100).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn log_likelihood_trace_is_monotone() {
        let mut rng = rng_from_seed(23);
        use rand_distr::{Distribution, StandardNormal};
        let mut values = Vec::new();
        for _ in 0..50 {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(z);
        }
        for _ in 0..50 {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(2.5 + 0.7 * z);
        }
        let model = fit_1d(&values, 2);
        for w in model.ll_trace().windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "log-likelihood decreased: {w:?}");
        }
    }

    #[test]
    fn responsibilities_single_component_is_one() {
        let model = fit_1d(&[0.0, 1.0, 2.0], 1);
        let r = responsibilities(&model, &[0.7]).unwrap();
        assert_eq!(r.len(), 1);
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn responsibilities_symmetric_midpoint() {
        // Two components with identical covariances; a point equidistant from
        // both means splits evenly.
        let c1 = GaussianComponent::new(
            DVector::from_vec(vec![0.0]),
            DMatrix::from_vec(1, 1, vec![1.0]),
        )
        .unwrap();
        let c2 = GaussianComponent::new(
            DVector::from_vec(vec![4.0]),
            DMatrix::from_vec(1, 1, vec![1.0]),
        )
        .unwrap();
        let model = MixtureModel {
            components: vec![c1, c2],
            log_likelihood: 0.0,
            ll_trace: vec![],
            iterations: 0,
            converged: true,
        };
        let r = responsibilities(&model, &[2.0]).unwrap();
        assert_relative_eq!(r[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(r[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn responsibilities_far_separation_saturates() {
        // x at the first mean with the means 20 standard deviations apart.
        let c1 = GaussianComponent::new(
            DVector::from_vec(vec![0.0]),
            DMatrix::from_vec(1, 1, vec![1.0]),
        )
        .unwrap();
        let c2 = GaussianComponent::new(
            DVector::from_vec(vec![20.0]),
            DMatrix::from_vec(1, 1, vec![1.0]),
        )
        .unwrap();
        let model = MixtureModel {
            components: vec![c1, c2],
            log_likelihood: 0.0,
            ll_trace: vec![],
            iterations: 0,
            converged: true,
        };
        let r = responsibilities(&model, &[0.0]).unwrap();
        // Density ratio is exp(-200); the posterior saturates.
        assert!(r[0] > 1.0 - 1e-12, "r = {r:?}");
        let sum: f64 = r.iter().sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn responsibilities_reject_non_finite_point() {
        let model = fit_1d(&[0.0, 1.0, 2.0], 1);
        assert!(responsibilities(&model, &[f64::NAN]).is_err());
    }

    #[test]
    fn map_assign_ties_take_lower_index() {
        let c = GaussianComponent::new(
            DVector::from_vec(vec![0.0]),
            DMatrix::from_vec(1, 1, vec![1.0]),
        )
        .unwrap();
        let model = MixtureModel {
            components: vec![c.clone(), c],
            log_likelihood: 0.0,
            ll_trace: vec![],
            iterations: 0,
            converged: true,
        };
        // Identical components: every point is an exact tie.
        let points = PointSet::univariate(&[-1.0, 0.0, 3.0]).unwrap();
        assert_eq!(map_assign(&model, &points).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn map_assign_matches_density_ratio() {
        let mut rng = rng_from_seed(5);
        use rand_distr::{Distribution, StandardNormal};
        let mut values = Vec::new();
        for _ in 0..40 {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(0.1 * z);
        }
        for _ in 0..40 {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(8.0 + 0.1 * z);
        }
        let points = PointSet::univariate(&values).unwrap();
        let model = fit_1d(&values, 2);
        let labels = map_assign(&model, &points).unwrap();
        for (x, &label) in points.iter().zip(&labels) {
            let best = (0..2)
                .max_by(|&a, &b| {
                    model
                        .component(a)
                        .log_density(x)
                        .unwrap()
                        .total_cmp(&model.component(b).log_density(x).unwrap())
                })
                .unwrap();
            assert_eq!(label, best);
        }
    }

    #[test]
    fn pseudo_log_likelihood_standard_normal_point() {
        let c = GaussianComponent::new(
            DVector::from_vec(vec![0.0]),
            DMatrix::from_vec(1, 1, vec![1.0]),
        )
        .unwrap();
        let model = MixtureModel {
            components: vec![c],
            log_likelihood: 0.0,
            ll_trace: vec![],
            iterations: 0,
            converged: true,
        };
        let x1 = PointSet::univariate(&[0.0]).unwrap();
        let x2 = PointSet::from_flat(vec![], 1).unwrap();
        let pair = AssignmentPair {
            labels1: vec![0],
            labels2: vec![],
        };
        let ll = pseudo_log_likelihood(&model, &x1, &x2, &pair).unwrap();
        // -0.5 * ln(2 pi)
        assert_relative_eq!(ll, -0.9189385332046727, epsilon = 1e-12);
    }

    #[test]
    fn pseudo_log_likelihood_k1_equals_gaussian_log_likelihood() {
        let values = [0.3, -1.2, 0.8, 2.0, -0.5];
        let points = PointSet::univariate(&values).unwrap();
        let model = fit_1d(&values, 1);
        let x2 = PointSet::from_flat(vec![], 1).unwrap();
        let pair = AssignmentPair {
            labels1: vec![0; values.len()],
            labels2: vec![],
        };
        let pll = pseudo_log_likelihood(&model, &points, &x2, &pair).unwrap();
        let direct: f64 = points
            .iter()
            .map(|x| model.component(0).log_density(x).unwrap())
            .sum();
        assert_relative_eq!(pll, direct, epsilon = 1e-12);
    }

    #[test]
    fn relabeling_to_far_component_decreases_pseudo_likelihood() {
        let mut rng = rng_from_seed(11);
        use rand_distr::{Distribution, StandardNormal};
        let mut values = Vec::new();
        for _ in 0..30 {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(0.3 * z);
        }
        for _ in 0..30 {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(9.0 + 0.3 * z);
        }
        let points = PointSet::univariate(&values).unwrap();
        let model = fit_1d(&values, 2);
        let x2 = PointSet::from_flat(vec![], 1).unwrap();
        let map = map_assign(&model, &points).unwrap();
        let pair = AssignmentPair {
            labels1: map.clone(),
            labels2: vec![],
        };
        let base = pseudo_log_likelihood(&model, &points, &x2, &pair).unwrap();
        // Flip one label to the other component.
        let mut perturbed = map;
        perturbed[0] = 1 - perturbed[0];
        let pair2 = AssignmentPair {
            labels1: perturbed,
            labels2: vec![],
        };
        let worse = pseudo_log_likelihood(&model, &points, &x2, &pair2).unwrap();
        assert!(worse < base);
    }

    #[test]
    fn sampling_degenerate_posterior_returns_map() {
        let mut rng = rng_from_seed(3);
        let resp1 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let resp2 = vec![vec![1.0, 0.0]];
        for _ in 0..50 {
            let pair = sample_assignment_from(&resp1, &resp2, &mut rng);
            assert_eq!(pair.labels1, vec![0, 1]);
            assert_eq!(pair.labels2, vec![0]);
        }
    }

    #[test]
    fn sampling_marginals_match_responsibilities() {
        let mut rng = rng_from_seed(1234);
        let resp1 = vec![vec![0.5, 0.5]];
        let resp2: Vec<Vec<f64>> = vec![];
        let draws = 10_000;
        let mut count0 = 0usize;
        for _ in 0..draws {
            let pair = sample_assignment_from(&resp1, &resp2, &mut rng);
            if pair.labels1[0] == 0 {
                count0 += 1;
            }
        }
        let freq = count0 as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.02, "freq = {freq}");
    }

    #[test]
    fn sampled_joint_frequencies_match_pseudo_likelihood_ratios() {
        // 3 points, 2 components: enumerate all 8 assignments, normalize
        // exp(pseudo-log-likelihood), then compare against draw frequencies.
        let mut rng = rng_from_seed(99);
        let c1 = GaussianComponent::new(
            DVector::from_vec(vec![0.0]),
            DMatrix::from_vec(1, 1, vec![1.0]),
        )
        .unwrap();
        let c2 = GaussianComponent::new(
            DVector::from_vec(vec![1.5]),
            DMatrix::from_vec(1, 1, vec![1.0]),
        )
        .unwrap();
        let model = MixtureModel {
            components: vec![c1, c2],
            log_likelihood: 0.0,
            ll_trace: vec![],
            iterations: 0,
            converged: true,
        };
        let x1 = PointSet::univariate(&[0.2, 0.9]).unwrap();
        let x2 = PointSet::univariate(&[1.4]).unwrap();

        let mut weights = Vec::new();
        for code in 0..8usize {
            let pair = AssignmentPair {
                labels1: vec![code & 1, (code >> 1) & 1],
                labels2: vec![(code >> 2) & 1],
            };
            weights.push(
                pseudo_log_likelihood(&model, &x1, &x2, &pair)
                    .unwrap()
                    .exp(),
            );
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }

        let draws = 40_000;
        let mut counts = [0usize; 8];
        for _ in 0..draws {
            let pair = sample_assignment(&model, &x1, &x2, &mut rng).unwrap();
            let code = pair.labels1[0] | (pair.labels1[1] << 1) | (pair.labels2[0] << 2);
            counts[code] += 1;
        }
        for (code, &w) in weights.iter().enumerate() {
            let freq = counts[code] as f64 / draws as f64;
            let se = (w * (1.0 - w) / draws as f64).sqrt();
            assert!(
                (freq - w).abs() < 4.0 * se + 1e-3,
                "code {code}: freq {freq} vs weight {w}"
            );
        }
    }

    #[test]
    fn regularization_rescues_collapsed_covariance() {
        // All points identical within a cluster: zero covariance.
        let c = GaussianComponent::new(
            DVector::from_vec(vec![1.0, 2.0]),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        assert!(c.log_density(&[1.0, 2.0]).unwrap().is_finite());
    }

    #[test]
    fn non_symmetric_covariance_is_rejected() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        let err = GaussianComponent::new(DVector::from_vec(vec![0.0, 0.0]), cov).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
