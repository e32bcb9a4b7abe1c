//! Class-balanced k-nearest-neighbour voting under the Mahalanobis metric.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::lda::split_classes;
use super::linalg::{mean, scatter, spd_factor};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 3;

/// `sqrt((x - y)^T M (x - y))` for a symmetric positive definite `M`
/// (normally an inverse covariance).
pub fn mahalanobis(x: &[f64], y: &[f64], inv_cov: &DMatrix<f64>) -> Result<f64> {
    let d = inv_cov.nrows();
    if inv_cov.ncols() != d || x.len() != d || y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len().max(y.len()),
        });
    }
    if Cholesky::new(inv_cov.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let diff = DVector::from_fn(d, |i, _| x[i] - y[i]);
    Ok(diff.dot(&(inv_cov * &diff)).max(0.0).sqrt())
}

#[derive(Debug, Clone)]
pub struct KnnModel {
    x: Vec<Vec<f64>>,
    y: Vec<i8>,
    /// Factor of the training covariance; distances are `|L^-1 (x - y)|`.
    chol: Cholesky<f64, Dyn>,
    pub k: usize,
    pub ridge: bool,
}

/// Stores the training set and factors its covariance (taken over all
/// training samples regardless of class).
pub fn knn_train(x: &[Vec<f64>], y: &[i8], k: usize) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let (pos, neg) = split_classes(x, y)?;
    if pos.len() < k {
        return Err(Error::ClassTooSmall(
            "ALS",
            format!("{} training samples, K = {k}", pos.len()),
        ));
    }
    if neg.len() < k {
        return Err(Error::ClassTooSmall(
            "HC",
            format!("{} training samples, K = {k}", neg.len()),
        ));
    }
    let all: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
    let cov = scatter(&all, &mean(&all)) / (x.len() - 1) as f64;
    let (chol, ridge) = spd_factor(&cov)?;
    Ok(KnnModel {
        x: x.to_vec(),
        y: y.to_vec(),
        chol,
        k,
        ridge,
    })
}

impl KnnModel {
    pub fn inverse_covariance(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff = DVector::from_fn(a.len(), |i, _| a[i] - b[i]);
        let z = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a non-zero diagonal");
        z.norm()
    }

    /// Sign of `sum 1/d(x, x+) - sum 1/d(x, x-)` over the K nearest samples
    /// of each class; an exact match returns that sample's label, and a zero
    /// vote returns +1.
    pub fn predict(&self, q: &[f64]) -> Result<i8> {
        let d = self.chol.l_dirty().nrows();
        if q.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: q.len(),
            });
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (row, &label) in self.x.iter().zip(&self.y) {
            let dist = self.distance(q, row);
            if dist == 0.0 {
                return Ok(if label > 0 { 1 } else { -1 });
            }
            if label > 0 {
                pos.push(dist);
            } else {
                neg.push(dist);
            }
        }
        let vote = |mut ds: Vec<f64>| -> f64 {
            ds.sort_by(f64::total_cmp);
            ds.iter().take(self.k).map(|d| 1.0 / d).sum()
        };
        Ok(if vote(pos) - vote(neg) >= 0.0 { 1 } else { -1 })
    }
}

pub fn knn_predict(m: &KnnModel, x: &[f64]) -> Result<i8> {
    m.predict(x)
}
