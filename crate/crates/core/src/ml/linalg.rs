use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Smallest accepted ratio between the extreme squared Cholesky pivots before
/// the matrix is treated as numerically singular.
const PIVOT_RATIO: f64 = 1e-10;

/// Ridge added to a singular scatter or covariance matrix, relative to its
/// mean diagonal.
const RIDGE_REL: f64 = 1e-6;

pub(crate) fn mean(rows: &[&[f64]]) -> DVector<f64> {
    let d = rows[0].len();
    let mut m = DVector::zeros(d);
    for r in rows {
        for (j, v) in r.iter().enumerate() {
            m[j] += v;
        }
    }
    m / rows.len() as f64
}

/// Sum of outer products of deviations from `centre`.
pub(crate) fn scatter(rows: &[&[f64]], centre: &DVector<f64>) -> DMatrix<f64> {
    let d = centre.len();
    let mut s = DMatrix::zeros(d, d);
    for r in rows {
        let dev = DVector::from_fn(d, |j, _| r[j] - centre[j]);
        s.ger(1.0, &dev, &dev, 1.0);
    }
    s
}

fn well_conditioned(c: &Cholesky<f64, Dyn>) -> bool {
    let l = c.l_dirty();
    let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min / max >= PIVOT_RATIO
}

/// Cholesky factor of `m`, or of `m + lambda*I` with
/// `lambda = 1e-6 * trace(m) / D` when `m` is singular or nearly so.
/// Returns the factor and whether the ridge was applied.
pub(crate) fn spd_factor(m: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, bool)> {
    if let Some(c) = Cholesky::new(m.clone()) {
        if well_conditioned(&c) {
            return Ok((c, false));
        }
    }
    let d = m.nrows();
    let mut lambda = RIDGE_REL * m.trace() / d as f64;
    if !(lambda > 0.0) {
        lambda = RIDGE_REL;
    }
    let ridged = m + DMatrix::identity(d, d) * lambda;
    Cholesky::new(ridged)
        .map(|c| (c, true))
        .ok_or(Error::NotPositiveDefinite)
}
