//! Removal of the sub-population effect: every observation is centered at its
//! cluster mean and rescaled by the inverse square root of the cluster
//! covariance, so that under the null all transformed observations share one
//! standard distribution.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::data::PointSet;
use crate::error::{Error, Result};
use crate::mixture::{AssignmentPair, GaussianComponent, MixtureModel};

/// Eigenvalue floor applied before inversion, relative to trace/d.
const EIG_EPS: f64 = 1e-6;

/// Symmetric positive-definite inverse square root of a symmetric matrix.
///
/// Computed by eigendecomposition with eigenvalues clamped below at
/// eps * (trace/d) before inversion. When no clamping occurs the result R
/// satisfies R * sigma * R = I. The symmetric root is used (rather than a
/// Cholesky factor) so the transform does not depend on coordinate order.
pub fn matrix_inv_sqrt(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if sigma.nrows() != sigma.ncols() {
        return Err(Error::invalid("matrix must be square"));
    }
    let scale = sigma.abs().max().max(1.0);
    let asym = (sigma - sigma.transpose()).abs().max();
    if asym > 1e-8 * scale {
        return Err(Error::invalid("matrix is not symmetric"));
    }
    let d = sigma.nrows();
    let mut trace_scale = sigma.trace() / d as f64;
    if trace_scale <= 0.0 {
        trace_scale = 1.0;
    }
    let floor = EIG_EPS * trace_scale;

    let eig = SymmetricEigen::new(sigma.clone());
    let inv_sqrt_vals: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| 1.0 / l.max(floor).sqrt())
        .collect();
    let v = &eig.eigenvectors;
    let mut result = DMatrix::zeros(d, d);
    for (j, &w) in inv_sqrt_vals.iter().enumerate() {
        let col = v.column(j);
        result.ger(w, &col, &col, 1.0);
    }
    // Kill the floating-point asymmetry left by the accumulation.
    let t = result.transpose();
    Ok((result + t) * 0.5)
}

/// Whitens one observation with respect to a Gaussian component:
/// sigma^(-1/2) * (x - mean).
pub fn whiten(x: &[f64], component: &GaussianComponent) -> Result<Vec<f64>> {
    if x.len() != component.dim() {
        return Err(Error::invalid(format!(
            "point has dimension {}, component expects {}",
            x.len(),
            component.dim()
        )));
    }
    let root = matrix_inv_sqrt(component.covariance())?;
    let centered = DVector::from_column_slice(x) - component.mean();
    Ok((root * centered).iter().copied().collect())
}

/// Both groups after the per-cluster whitening transform.
#[derive(Debug, Clone)]
pub struct TransformedPair {
    pub t1: PointSet,
    pub t2: PointSet,
    /// The labeling that chose each observation's component.
    pub source: AssignmentPair,
}

/// Whitens every observation by the component its label names.
///
/// No observation is dropped: outliers were relabeled to their nearest
/// surviving cluster upstream, so every label is valid here.
pub fn transform_pair(
    x1: &PointSet,
    x2: &PointSet,
    model: &MixtureModel,
    assignment: &AssignmentPair,
) -> Result<TransformedPair> {
    if assignment.labels1.len() != x1.len() || assignment.labels2.len() != x2.len() {
        return Err(Error::invalid("assignment length does not match the data"));
    }
    let k = model.k();
    if let Some(bad) = assignment.iter().find(|&l| l >= k) {
        return Err(Error::invalid(format!(
            "label {bad} out of range for {k} components"
        )));
    }

    // One inverse square root per component, computed once.
    let roots: Vec<DMatrix<f64>> = model
        .components()
        .iter()
        .map(|c| matrix_inv_sqrt(c.covariance()))
        .collect::<Result<_>>()?;

    let whiten_with = |points: &PointSet, labels: &[usize]| -> PointSet {
        let mut out = PointSet::with_capacity(points.len(), points.dim());
        for (x, &label) in points.iter().zip(labels) {
            let centered = DVector::from_column_slice(x) - model.component(label).mean();
            let w = &roots[label] * centered;
            out.push(w.as_slice());
        }
        out
    };

    Ok(TransformedPair {
        t1: whiten_with(x1, &assignment.labels1),
        t2: whiten_with(x2, &assignment.labels2),
        source: assignment.clone(),
    })
}
