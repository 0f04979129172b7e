//! First principal component, used to collapse highly correlated feature
//! sets into one measurement variable.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use subpop::{Error, PointSet, Result};

/// Projects the points onto the leading eigenvector of their sample
/// covariance (mean-centered scores) and reports the explained variance
/// fraction.
///
/// Sign convention: the first nonzero loading of the eigenvector is made
/// positive. Among (near-)tied leading eigenvalues the eigenvector with the
/// largest absolute loading on the lowest-indexed coordinate wins, so exact
/// symmetry resolves toward the first axis.
pub fn pca_first_component(points: &PointSet) -> Result<(Vec<f64>, f64)> {
    let n = points.len();
    let d = points.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "PCA needs at least 2 observations".into(),
        ));
    }

    let mean = points.mean();
    let mut cov = DMatrix::zeros(d, d);
    let mut diff = DVector::zeros(d);
    for p in points.iter() {
        for j in 0..d {
            diff[j] = p[j] - mean[j];
        }
        cov.ger(1.0, &diff, &diff, 1.0);
    }
    cov /= (n - 1) as f64;

    let trace = cov.trace();
    if trace <= 0.0 {
        return Err(Error::DegenerateInput(
            "zero total variance: no principal direction".into(),
        ));
    }

    let eig = SymmetricEigen::new(cov);
    let max_val = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<usize> = None;
    for j in 0..d {
        if eig.eigenvalues[j] >= max_val - 1e-9 * max_val.abs() {
            let better = match best {
                None => true,
                Some(b) => {
                    // Tie rule: prefer the direction loading on the earliest
                    // coordinate.
                    let load = |idx: usize| {
                        let col = eig.eigenvectors.column(idx);
                        (0..d)
                            .map(|c| (c, col[c].abs()))
                            .max_by(|a, b| {
                                a.1.total_cmp(&b.1)
                                    .then_with(|| b.0.cmp(&a.0))
                            })
                            .map(|(c, _)| c)
                            .unwrap_or(0)
                    };
                    load(j) < load(b)
                }
            };
            if better {
                best = Some(j);
            }
        }
    }
    let lead = best.expect("at least one eigenvalue");
    let mut axis: Vec<f64> = eig.eigenvectors.column(lead).iter().copied().collect();
    if let Some(first_nonzero) = axis.iter().find(|v| v.abs() > 1e-12) {
        if *first_nonzero < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
    }

    let scores: Vec<f64> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&mean)
                .zip(&axis)
                .map(|((x, m), a)| (x - m) * a)
                .sum()
        })
        .collect();
    Ok((scores, eig.eigenvalues[lead] / trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn collinear_points_explain_everything() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let points = PointSet::from_rows(&rows).unwrap();
        let (_, frac) = pca_first_component(&points).unwrap();
        assert_relative_eq!(frac, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn square_corners_split_evenly() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ];
        let points = PointSet::from_rows(&rows).unwrap();
        let (scores, frac) = pca_first_component(&points).unwrap();
        assert_relative_eq!(frac, 0.5, epsilon = 1e-12);
        // Tie resolves to the first axis: scores are the centered first
        // coordinates.
        let expect = [-0.5, 0.5, -0.5, 0.5];
        for (s, e) in scores.iter().zip(expect) {
            assert_relative_eq!(*s, e, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_variance_is_degenerate() {
        let rows = vec![vec![3.0, 4.0]; 5];
        let points = PointSet::from_rows(&rows).unwrap();
        assert!(matches!(
            pca_first_component(&points),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn scores_invariant_under_row_reordering() {
        let rows = vec![
            vec![1.0, 0.2],
            vec![2.0, 0.9],
            vec![3.0, 1.4],
            vec![4.0, 2.2],
        ];
        let points = PointSet::from_rows(&rows).unwrap();
        let (scores, _) = pca_first_component(&points).unwrap();
        let mut shuffled = rows.clone();
        shuffled.reverse();
        let points2 = PointSet::from_rows(&shuffled).unwrap();
        let (scores2, _) = pca_first_component(&points2).unwrap();
        for (a, b) in scores.iter().zip(scores2.iter().rev()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn dominant_direction_is_found() {
        // Strong variance along (1, 1): the leading score recovers it.
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = (i as f64 - 20.0) / 4.0;
                vec![t + 0.01 * (i % 3) as f64, t - 0.01 * (i % 5) as f64]
            })
            .collect();
        let points = PointSet::from_rows(&rows).unwrap();
        let (_, frac) = pca_first_component(&points).unwrap();
        assert!(frac > 0.99, "frac = {frac}");
    }
}
