//! Observation containers shared by every stage of the analysis.

use crate::error::{Error, Result};

/// A set of d-dimensional observations stored row-major.
///
/// Every point has the same dimension and only finite coordinates; both are
/// checked at construction so downstream numerics never re-validate.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    dim: usize,
}

impl PointSet {
    /// Builds a point set from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("point set needs at least one row; use from_flat for an empty set with a known dimension"));
        }
        let dim = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "row {i} has dimension {} but row 0 has dimension {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim)
    }

    /// Builds a point set from a flat row-major buffer. Allows zero points.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if data.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "buffer length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate at point {}, coordinate {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(PointSet { data, dim })
    }

    /// Convenience constructor for one-dimensional data.
    pub fn univariate(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + Clone + ExactSizeIterator {
        self.data.chunks_exact(self.dim)
    }

    /// Values of coordinate `j` across all points.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter().map(|p| p[j]).collect()
    }

    /// The single column of a univariate set.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.dim != 1 {
            return Err(Error::invalid(format!(
                "expected univariate data, got dimension {}",
                self.dim
            )));
        }
        Ok(self.data.clone())
    }

    /// Concatenates two sets of equal dimension (self first).
    pub fn concat(&self, other: &PointSet) -> Result<PointSet> {
        if self.dim != other.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(PointSet {
            data,
            dim: self.dim,
        })
    }

    /// Coordinate-wise sample mean. Empty sets yield a zero vector.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        if self.is_empty() {
            return out;
        }
        for p in self.iter() {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        let n = self.len() as f64;
        for o in &mut out {
            *o /= n;
        }
        out
    }

    pub(crate) fn push(&mut self, point: &[f64]) {
        debug_assert_eq!(point.len(), self.dim);
        self.data.extend_from_slice(point);
    }

    pub(crate) fn with_capacity(n: usize, dim: usize) -> Self {
        PointSet {
            data: Vec::with_capacity(n * dim),
            dim,
        }
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The two samples under comparison: `x1` is the control group (drawn from F)
/// and `x2` the treatment group (drawn from G).
#[derive(Debug, Clone)]
pub struct TwoSampleData {
    pub x1: PointSet,
    pub x2: PointSet,
}

impl TwoSampleData {
    pub fn new(x1: PointSet, x2: PointSet) -> Result<Self> {
        if x1.dim() != x2.dim() {
            return Err(Error::invalid(format!(
                "group dimensions differ: {} vs {}",
                x1.dim(),
                x2.dim()
            )));
        }
        if x1.len() < 2 || x2.len() < 2 {
            return Err(Error::invalid(format!(
                "each group needs at least 2 observations (got {} and {})",
                x1.len(),
                x2.len()
            )));
        }
        Ok(TwoSampleData { x1, x2 })
    }

    pub fn dim(&self) -> usize {
        self.x1.dim()
    }

    pub fn n1(&self) -> usize {
        self.x1.len()
    }

    pub fn n2(&self) -> usize {
        self.x2.len()
    }
}
